#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gbrbm/data.hpp"
#include "gbrbm/training.hpp"

namespace gbrbm::cli {

/// Process exit statuses.
enum ExitStatus : int {
    kOk = 0,
    kFailure = 1,
    kUsageError = 2,    ///< bad arguments, config parse error, missing/unreadable input
    kDiverged = 3,      ///< a monitored metric or the parameters became non-finite
    kExactTooLarge = 4, ///< exact evaluation requested with more than 20 hidden units
    kIoError = 5,       ///< output could not be written
};

/// Environment variable naming the default output root for `train`.
inline constexpr const char* kOutputRootEnv = "GBRBM_OUTPUT_ROOT";

/// Stream ids for synthetic data generation (train and test splits).
inline constexpr std::uint64_t kDataStreamId = 0x3;
inline constexpr std::uint64_t kTestDataStreamId = 0x4;

/// Thrown for malformed config files or values; maps to kUsageError.
class ConfigError : public Error {
  public:
    using Error::Error;
};

struct RunConfig {
    TrainConfig train;
    std::size_t hidden = 16;
    double tau = 0.01;

    std::string train_data;
    std::string test_data;
    char csv_delimiter = ',';

    // Synthetic mixture used when train_data is empty.
    std::size_t synth_components = 4;
    std::size_t synth_dims = 16;
    std::size_t synth_samples = 2000;
    std::size_t synth_test_samples = 0;
    double synth_spread = 2.0;

    /// Ordered '+'-separated steps from {standardize, zca}, or "none".
    std::string preprocess = "standardize";
    bool global_standardize = false;
    double zca_epsilon = 1e-2;

    /// Epochs between evaluations; 0 picks 1 for exact evaluation and 10 for AIS.
    std::size_t eval_every = 0;
    /// auto | exact | ais. auto uses exact when n <= 20.
    std::string eval_mode = "auto";
    std::size_t ais_particles = 100;
    std::size_t ais_temps = 10000;

    std::string out_dir;
    /// Epochs between intermediate checkpoints; 0 writes only the final one.
    std::size_t checkpoint_every = 0;
    bool checkpoint_binary = false;
};

/// Names of every config key, in echo order.
std::vector<std::string> config_keys();
/// Set one key from its textual value. Throws ConfigError.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Parse the key=value grammar:
///
///     # comment           (also allowed after a value)
///     key = value         (whitespace around '=' optional)
///
/// Blank lines are ignored; unknown keys and repeated keys are errors.
RunConfig parse_run_config(const std::string& text, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

/// (key, value) pairs describing the run; the output directory is omitted so
/// identical runs written to different places produce identical checkpoints.
std::vector<std::pair<std::string, std::string>> echo_config(const RunConfig& config);

struct PreparedData {
    Dataset train;
    std::optional<Dataset> test;
};

/// Load or synthesize the splits and apply the preprocessing fitted on the train split.
PreparedData prepare_data(const RunConfig& config);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);
/// Convenience overload; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gbrbm::cli
