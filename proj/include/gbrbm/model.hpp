#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gbrbm/types.hpp"

namespace gbrbm {

/// Largest hidden layer for which the 2^n enumeration routines run.
inline constexpr std::size_t kMaxEnumHidden = 20;

/// Gaussian-Bernoulli RBM parameters.
///
/// `weights(i, j)` couples visible unit i to hidden unit j. Visible variances
/// are stored as `log_var` (z) so that sigma_i^2 = exp(z_i) stays positive.
struct RbmParams {
    Matrix weights;
    Vector vbias;
    Vector hbias;
    Vector log_var;

    RbmParams() = default;
    /// All-zero parameters (unit variance).
    explicit RbmParams(ModelDims dims);

    ModelDims dims() const { return {static_cast<std::size_t>(weights.rows()), static_cast<std::size_t>(weights.cols())}; }
    std::size_t visible() const { return static_cast<std::size_t>(weights.rows()); }
    std::size_t hidden() const { return static_cast<std::size_t>(weights.cols()); }

    /// 1 / sigma_i^2.
    Vector inv_var() const;

    /// Throws ShapeError/DomainError if shapes are inconsistent or any entry is non-finite.
    void validate() const;
};

double sigmoid(double x);
/// log(1 + e^x) without overflow.
double softplus(double x);
/// log(sum_k exp(x_k)); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> xs);

/// E(v, h) = sum_i (v_i - b_i)^2 / 2 sigma_i^2 - sum_ij w_ij v_i h_j / sigma_i^2 - sum_j c_j h_j.
double energy(const RbmParams& params, const Vector& v, const Vector& h);

/// c_j + sum_i w_ij v_i / sigma_i^2.
Vector hidden_preactivation(const RbmParams& params, const Vector& v);
/// p(h_j = 1 | v).
Vector hidden_activation(const RbmParams& params, const Vector& v);
/// b + W h, the mean of p(v | h).
Vector visible_conditional_mean(const RbmParams& params, const Vector& h);

/// g(theta, v) = log sum_h exp(-E(v, h)), via the factorized softplus form.
double free_energy_g(const RbmParams& params, const Vector& v);
/// g(theta, v) by explicit enumeration of all 2^n hidden vectors.
double free_energy_g_enum(const RbmParams& params, const Vector& v);

/// log Z(theta), summing the visible integral in closed form and enumerating h.
double exact_log_partition(const RbmParams& params, Backend backend = Backend::openmp);

/// Log of the unnormalized hidden marginal, c.h + sum_i s_i (s_i/2 + b_i) / sigma_i^2 with s = W h.
/// Adding the Gaussian constant gives log p~(h) whose log-sum is log Z.
double hidden_marginal_log_weight(const RbmParams& params, const Vector& h);

/// Unpack bit pattern `code` into a 0/1 vector of length n (bit j -> h_j).
Vector hidden_config(std::uint64_t code, std::size_t n);

/// Log-sum-exponential-quadratic: log sum_i beta_i exp(u'A_i u / 2 + a_i'u).
struct LseQProblem {
    std::vector<Matrix> quad_terms;
    std::vector<Vector> lin_terms;
    std::vector<double> coeffs;

    std::size_t dim() const { return lin_terms.empty() ? 0 : static_cast<std::size_t>(lin_terms.front().size()); }
    /// Shapes, beta_i >= 0, symmetry, and eigenvalues >= -tol.
    void validate(double tol = 1e-10) const;
};

struct ValueGrad {
    double value = 0.0;
    Vector grad;
};

ValueGrad lse_q_value_grad(const LseQProblem& problem, const Vector& u);

}  // namespace gbrbm
