#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gbrbm/data.hpp"
#include "gbrbm/gradients.hpp"
#include "gbrbm/model.hpp"
#include "gbrbm/rng.hpp"
#include "gbrbm/sampling.hpp"

namespace gbrbm {

enum class Algorithm { cd, pcd, sdcp, sdcp_var };

std::string to_string(Algorithm algorithm);
/// Accepts "cd", "pcd", "sdcp", "sdcp_var" (case-insensitive).
Algorithm parse_algorithm(const std::string& name);

struct TrainConfig {
    Algorithm algorithm = Algorithm::cd;
    double eta = 1e-3;
    std::size_t gibbs_steps = 1;        ///< K, for CD and PCD
    std::size_t inner_iters = 1;        ///< d, for S-DCP
    std::size_t inner_gibbs_steps = 1;  ///< K', for S-DCP
    std::size_t batch_size = 1;         ///< N_B
    std::size_t epochs = 1;             ///< N_E
    std::uint64_t seed = 0;
    /// Multiplier on eta for the log-variance update.
    double variance_lr_scale = 1.0;
    /// Learn z with CD/PCD/S-DCP as well (implied by sdcp_var).
    bool learn_variance = false;

    bool learns_variance() const { return algorithm == Algorithm::sdcp_var || learn_variance; }
    bool is_sdcp() const { return algorithm == Algorithm::sdcp || algorithm == Algorithm::sdcp_var; }
    /// Parameter updates per mini-batch.
    std::size_t updates_per_batch() const { return is_sdcp() ? inner_iters : 1; }
    void validate() const;
};

struct TrainState {
    RbmParams params;
    std::vector<ChainState> persistent_chains;  ///< PCD only; one per batch slot
    std::size_t epoch = 0;
    std::size_t batch_in_epoch = 0;
    std::size_t update_count = 0;
    RngStream rng;  ///< run stream; drives the epoch shuffles
};

/// Stream ids reserved for the run-level streams.
inline constexpr std::uint64_t kInitStreamId = 0x1;
inline constexpr std::uint64_t kRunStreamId = 0x2;

/// Stream for the chain of the sample at `position` (within the epoch) of `epoch`.
RngStream chain_stream(std::uint64_t seed, std::size_t epoch, std::size_t position);

/// W ~ U[-a, a] with a = 6 / sqrt(m + n); b = data mean;
/// c_j = -(|b - W_j|^2 - |b|^2) / 2 + log tau; z = 0.
RbmParams init_params(ModelDims dims, const Dataset& data, double tau, RngStream& rng);

TrainState make_train_state(RbmParams params, const TrainConfig& config);

/// theta += eta (positive - negative) over W and c.
void apply_ascent(RbmParams& params, const ParamGrad& positive, const ParamGrad& negative, double eta);

/// One CD-K (persistent = false) or PCD-K update.
TrainState cd_step(TrainState state, const SampleMatrix& batch, const TrainConfig& config, bool persistent);
/// d inner stochastic updates on the convex surrogate with the g-gradient held at the incoming parameters.
TrainState sdcp_step(TrainState state, const SampleMatrix& batch, const TrainConfig& config);
/// sdcp_step followed by one log-variance update from the final chain ends.
TrainState sdcp_var_step(TrainState state, const SampleMatrix& batch, const TrainConfig& config);
/// Dispatch on config.algorithm.
TrainState train_batch(TrainState state, const SampleMatrix& batch, const TrainConfig& config);

/// Reshuffle, then one pass in full mini-batches (remainder dropped).
TrainState train_epoch(TrainState state, const Dataset& data, const TrainConfig& config);

/// One outer DC iteration with the exact model gradient in place of the MCMC estimate.
RbmParams dca_exact_step(RbmParams params, const SampleMatrix& data, double eta, std::size_t inner_iters);

struct CostEstimate {
    double cd = 0.0;
    double sdcp = 0.0;
    double ratio() const { return sdcp / cd; }
};

/// Per-mini-batch cost: CD-K is N_B (K T + 2L); S-DCP is d N_B (K' T + L) + N_B L.
CostEstimate cost_model(std::size_t gibbs_steps, std::size_t inner_iters, std::size_t inner_gibbs_steps,
                        std::size_t batch_size, double transition_cost, double gradient_cost);

}  // namespace gbrbm
