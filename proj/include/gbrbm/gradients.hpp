#pragma once

#include <optional>
#include <span>

#include "gbrbm/model.hpp"
#include "gbrbm/sampling.hpp"

namespace gbrbm {

/// Gradient over the trainable parameters. The visible bias is never trained,
/// so there is deliberately no component for it.
struct ParamGrad {
    Matrix d_weights;
    Vector d_hbias;
    std::optional<Vector> d_logvar;

    static ParamGrad zeros(ModelDims dims, bool with_logvar = false);

    ParamGrad& operator+=(const ParamGrad& other);
    ParamGrad& operator-=(const ParamGrad& other);
    ParamGrad& operator*=(double scale);

    /// Largest absolute entry over all present components.
    double max_abs() const;
};

ParamGrad operator-(ParamGrad lhs, const ParamGrad& rhs);

/// Whether gradients carry the d/dz component.
enum class VarianceMode { fixed, learned };

/// Batch mean of dg/dtheta: dW_ij = v_i/sigma_i^2 p(h_j=1|v), dc_j = p(h_j=1|v),
/// and in learned mode dz_i = e^{-z_i}[(v_i-b_i)^2/2 - v_i sum_j w_ij p(h_j=1|v)].
ParamGrad grad_g(const RbmParams& params, const SampleMatrix& batch, VarianceMode mode = VarianceMode::fixed,
                 Backend backend = Backend::openmp);

/// Estimate of df/dtheta from chain end states, with the hidden layer
/// marginalized analytically (the g-gradient form evaluated at the chain visibles).
ParamGrad grad_f_estimate(const RbmParams& params, std::span<const ChainState> chain_ends,
                          VarianceMode mode = VarianceMode::fixed, Backend backend = Backend::openmp);

/// Exact df/dtheta by enumerating the 2^n hidden configurations.
ParamGrad grad_f_exact(const RbmParams& params, VarianceMode mode = VarianceMode::fixed,
                       Backend backend = Backend::openmp);

/// d/dz of the log-likelihood: mean per-sample z term over the data batch
/// minus the same mean over the model batch.
Vector grad_logvar(const RbmParams& params, const SampleMatrix& data_batch, const SampleMatrix& model_batch);

/// Central differences of g(theta, v) - f(theta) over W, c, and z.
ParamGrad numerical_gradient(const RbmParams& params, const Vector& v, double epsilon = 1e-5);

/// Stack chain visibles into rows.
SampleMatrix chain_visibles(std::span<const ChainState> chains);

}  // namespace gbrbm
