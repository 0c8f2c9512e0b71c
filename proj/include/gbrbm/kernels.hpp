#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference path and
// an OpenMP path. The OpenMP path reduces over fixed-size blocks in a fixed
// pairwise order, so its result does not depend on the thread count; it agrees
// with the reference path up to summation-order rounding.

#include <cstddef>
#include <span>
#include <vector>

#include "gbrbm/gradients.hpp"
#include "gbrbm/rng.hpp"
#include "gbrbm/sampling.hpp"

namespace gbrbm::kernels {

/// Rows per reduction block in the OpenMP path.
inline constexpr std::size_t kRowBlock = 32;
/// Hidden configurations per reduction block in the enumeration kernels.
inline constexpr std::size_t kConfigBlock = 1024;

/// p(h = 1 | v) for every row; result is N x n.
SampleMatrix hidden_probs(const RbmParams& params, const SampleMatrix& v, Backend backend);

/// Row mean of the g-gradient statistics (see grad_g).
ParamGrad mean_positive_stats(const RbmParams& params, const SampleMatrix& v, bool with_logvar, Backend backend);

/// Row mean of the per-sample variance term e^{-z}[(v-b)^2/2 - v o (W p(h|v))].
Vector mean_logvar_term(const RbmParams& params, const SampleMatrix& v, Backend backend);

/// log sum_h exp(hidden_marginal_log_weight(h)) over all 2^n configurations.
double hidden_log_sum(const RbmParams& params, Backend backend);

/// Exact model expectation of the gradient statistics, i.e. df/dtheta.
ParamGrad model_expectation(const RbmParams& params, bool with_logvar, Backend backend);

/// Advance chains[i] by k Gibbs pairs using streams[i].
void gibbs_chains(const RbmParams& params, std::span<ChainState> chains, std::span<RngStream> streams,
                  std::size_t k, Backend backend);

/// Per-particle AIS log-weights along the weight-annealing path `betas`.
/// Particle p draws from base.child(p).
std::vector<double> ais_log_weights(const RbmParams& params, std::span<const double> betas,
                                    std::size_t particles, const RngStream& base, Backend backend);

/// Fixed-order pairwise sum of `parts` (empty -> 0).
double pairwise_sum(std::span<const double> parts);

}  // namespace gbrbm::kernels
