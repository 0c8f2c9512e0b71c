#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gbrbm/rng.hpp"
#include "gbrbm/types.hpp"

namespace gbrbm {

enum class Split { train, test, unsplit };

std::string to_string(Split split);

struct ImageShape {
    std::size_t rows = 0;
    std::size_t cols = 0;
};

/// Sample matrix (one sample per row) plus the ordered list of transforms
/// that produced it. `preprocessing` is only ever appended to.
struct Dataset {
    SampleMatrix samples;
    std::vector<std::string> preprocessing;
    Split split = Split::unsplit;
    std::optional<ImageShape> image_shape;

    std::size_t size() const { return static_cast<std::size_t>(samples.rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(samples.cols()); }

    /// Per-dimension mean of the samples.
    Vector mean() const;
};

/// Rows `indices` of `data`, in order.
SampleMatrix gather_rows(const SampleMatrix& data, std::span<const std::size_t> indices);

/// Rank-3 unsigned-byte IDX file; pixels scaled to [0, 1].
Dataset load_idx(const std::filesystem::path& path);
/// Inverse of load_idx: values are rounded back to bytes. Needs image_shape.
void write_idx(const Dataset& data, const std::filesystem::path& path);
Dataset parse_idx(std::span<const unsigned char> bytes, const std::string& origin = "<memory>");
std::vector<unsigned char> serialize_idx(const Dataset& data);

Dataset load_csv(const std::filesystem::path& path, char delimiter = ',', bool skip_header = false);
Dataset parse_csv(const std::string& text, char delimiter = ',', bool skip_header = false);

/// Dispatch on extension: `.csv`/`.txt` -> CSV, anything else -> IDX.
Dataset load_dataset(const std::filesystem::path& path, char delimiter = ',');

enum class StandardizeScope { per_dimension, global };

struct Standardization {
    Vector mean;
    Vector std_dev;  ///< Already floored; used as the divisor.
    StandardizeScope scope = StandardizeScope::per_dimension;
};

inline constexpr double kStdFloor = 1e-8;

/// Fit mean/population-std on `data` and transform it.
std::pair<Dataset, Standardization> standardize(const Dataset& data,
                                                StandardizeScope scope = StandardizeScope::per_dimension);
/// Transform with previously fitted statistics (e.g. test split with train stats).
Dataset apply_standardization(const Dataset& data, const Standardization& stats);

struct WhiteningTransform {
    Vector mean;
    Matrix zca_matrix;     ///< E (L + eps I)^{-1/2} E'
    Matrix unzca_matrix;   ///< E (L + eps I)^{1/2} E'
    double epsilon = 1e-2;
};

WhiteningTransform zca_fit(const Dataset& data, double epsilon = 1e-2);
Dataset zca_apply(const WhiteningTransform& transform, const Dataset& data);
/// Maps whitened samples back to the input space.
SampleMatrix zca_invert(const WhiteningTransform& transform, const SampleMatrix& whitened);

/// Uniform random permutation of [0, size).
std::vector<std::size_t> shuffle_epoch(std::size_t size, RngStream& rng);

/// Equal-weight Gaussian mixture with unit-variance components, standardized
/// per dimension unless `standardized` is false. Component k has mean
/// spread * (((k + i) mod K) - (K - 1)/2) in dimension i.
Dataset synth_mixture(std::size_t num_components, std::size_t dims, std::size_t num_samples, double spread,
                      RngStream& rng, bool standardized = true);

}  // namespace gbrbm
