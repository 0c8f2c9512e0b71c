#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gbrbm/data.hpp"
#include "gbrbm/model.hpp"
#include "gbrbm/rng.hpp"

namespace gbrbm {

struct AisConfig {
    std::size_t num_particles = 100;
    std::size_t num_temps = 10000;
    std::uint64_t seed = 0;

    /// Linear grid beta_k = k / (num_temps - 1), so beta_0 = 0 and the last is 1.
    std::vector<double> schedule() const;
    void validate() const;
};

struct LogZEstimate {
    double log_z = 0.0;
    /// Population standard deviation of the per-particle log-weights.
    double log_weight_std = 0.0;
    std::size_t particles_used = 0;
};

/// log Z of the zero-coupling base model: (m/2) log 2 pi + sum z / 2 + sum_j softplus(c_j).
double base_log_partition(const RbmParams& params);

/// Annealed importance sampling along the path that scales W by beta.
LogZEstimate ais_log_partition(const RbmParams& params, const AisConfig& config,
                               Backend backend = Backend::openmp);

/// Mean log p(v) over the dataset given log Z (ATLL on the train split, ATeLL on the test split).
double avg_log_likelihood(const RbmParams& params, const Dataset& data, double log_z);

/// Pointwise (x - min) / (max - min) with extrema taken over every series together.
std::vector<std::vector<double>> minmax_normalize(const std::vector<std::vector<double>>& curves);

inline constexpr std::size_t kDefaultSampleSteps = 200;

/// `count` independent chains started at standard-normal visibles, each run
/// for `steps` Gibbs pairs; returns the final visible states (one per row).
SampleMatrix generate_samples(const RbmParams& params, std::size_t count, std::size_t steps, const RngStream& rng);

}  // namespace gbrbm
