#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gbrbm/model.hpp"
#include "gbrbm/rng.hpp"

namespace gbrbm {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to reload a model and identify how it was produced.
struct Checkpoint {
    int format_version = kCheckpointVersion;
    RbmParams params;
    /// Ordered (key, value) echo of the run configuration.
    std::vector<std::pair<std::string, std::string>> config;
    std::size_t epoch = 0;
    std::size_t update_count = 0;
    RngStream rng;
};

/// Canonical text container. Grammar, one record per line:
///
///     gbrbm-checkpoint <version>
///     visible <m>
///     hidden <n>
///     epoch <e>
///     update_count <u>
///     rng <seed> <stream_id> <counter>
///     config <key> <value...>        (zero or more)
///     weights <m*n numbers, visible-major: w_00 w_01 ... w_0(n-1) w_10 ...>
///     vbias <m numbers>
///     hbias <n numbers>
///     log_var <m numbers>
///     end
///
/// Numbers use the shortest decimal form that round-trips exactly.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

/// Compact little-endian variant behind a 16-byte magic header.
std::vector<unsigned char> serialize_checkpoint_binary(const Checkpoint& ckpt);
Checkpoint parse_checkpoint_binary(std::span<const unsigned char> bytes);
bool is_binary_checkpoint(std::span<const unsigned char> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path, bool binary = false);
/// Detects the binary variant by its magic header.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Binary PGM (P5) of `pixels` (row-major rows x cols), min-max scaled to
/// [0, 255]; a constant image maps to 128.
std::vector<unsigned char> pgm_bytes(std::span<const double> pixels, std::size_t rows, std::size_t cols);
void export_pgm(std::span<const double> pixels, std::size_t rows, std::size_t cols,
                const std::filesystem::path& path);

}  // namespace gbrbm
