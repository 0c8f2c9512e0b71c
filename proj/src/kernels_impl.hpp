#pragma once

#include "gbrbm/kernels.hpp"

namespace gbrbm::kernels {

namespace reference {
SampleMatrix hidden_probs(const RbmParams& params, const SampleMatrix& v);
ParamGrad mean_positive_stats(const RbmParams& params, const SampleMatrix& v, bool with_logvar);
double hidden_log_sum(const RbmParams& params);
ParamGrad model_expectation(const RbmParams& params, bool with_logvar);
}  // namespace reference

namespace openmp {
SampleMatrix hidden_probs(const RbmParams& params, const SampleMatrix& v);
ParamGrad mean_positive_stats(const RbmParams& params, const SampleMatrix& v, bool with_logvar);
double hidden_log_sum(const RbmParams& params);
ParamGrad model_expectation(const RbmParams& params, bool with_logvar);
}  // namespace openmp

/// Single AIS particle; shared by both paths.
double ais_particle(const RbmParams& params, std::span<const double> betas, RngStream rng);

}  // namespace gbrbm::kernels
