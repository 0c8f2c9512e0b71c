#include "gbrbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "gbrbm/kernels.hpp"

namespace gbrbm {

namespace {

void require_visible(const RbmParams& params, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != params.visible()) {
        throw ShapeError("visible vector has " + std::to_string(v.size()) + " entries, model has " +
                         std::to_string(params.visible()));
    }
    if (!v.allFinite()) throw DomainError("visible vector contains non-finite entries");
}

void require_hidden(const RbmParams& params, const Vector& h) {
    if (static_cast<std::size_t>(h.size()) != params.hidden()) {
        throw ShapeError("hidden vector has " + std::to_string(h.size()) + " entries, model has " +
                         std::to_string(params.hidden()));
    }
    for (Eigen::Index j = 0; j < h.size(); ++j) {
        if (h[j] != 0.0 && h[j] != 1.0) throw DomainError("hidden vector must be binary");
    }
}

}  // namespace

RbmParams::RbmParams(ModelDims dims)
    : weights(Matrix::Zero(static_cast<Eigen::Index>(dims.visible), static_cast<Eigen::Index>(dims.hidden))),
      vbias(Vector::Zero(static_cast<Eigen::Index>(dims.visible))),
      hbias(Vector::Zero(static_cast<Eigen::Index>(dims.hidden))),
      log_var(Vector::Zero(static_cast<Eigen::Index>(dims.visible))) {
    if (dims.visible == 0 || dims.hidden == 0) throw DomainError("model needs at least one visible and one hidden unit");
}

Vector RbmParams::inv_var() const { return (-log_var.array()).exp().matrix(); }

void RbmParams::validate() const {
    if (weights.rows() == 0 || weights.cols() == 0) throw DomainError("empty model");
    if (vbias.size() != weights.rows() || log_var.size() != weights.rows() || hbias.size() != weights.cols()) {
        throw ShapeError("parameter shapes are inconsistent");
    }
    if (!weights.allFinite() || !vbias.allFinite() || !hbias.allFinite() || !log_var.allFinite()) {
        throw DomainError("parameters contain non-finite entries");
    }
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double log_sum_exp(std::span<const double> xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    const double peak = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(peak)) return peak;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - peak);
    return peak + std::log(acc);
}

double energy(const RbmParams& params, const Vector& v, const Vector& h) {
    require_visible(params, v);
    require_hidden(params, h);
    const Vector inv_var = params.inv_var();
    const double quad = 0.5 * ((v - params.vbias).array().square() * inv_var.array()).sum();
    const double coupling = (v.cwiseProduct(inv_var)).dot(params.weights * h);
    return quad - coupling - params.hbias.dot(h);
}

Vector hidden_preactivation(const RbmParams& params, const Vector& v) {
    require_visible(params, v);
    return params.hbias + params.weights.transpose() * v.cwiseProduct(params.inv_var());
}

Vector hidden_activation(const RbmParams& params, const Vector& v) {
    return hidden_preactivation(params, v).unaryExpr([](double x) { return sigmoid(x); });
}

Vector visible_conditional_mean(const RbmParams& params, const Vector& h) {
    require_hidden(params, h);
    return params.vbias + params.weights * h;
}

double free_energy_g(const RbmParams& params, const Vector& v) {
    const Vector pre = hidden_preactivation(params, v);
    const double quad = 0.5 * ((v - params.vbias).array().square() * params.inv_var().array()).sum();
    double soft = 0.0;
    for (Eigen::Index j = 0; j < pre.size(); ++j) soft += softplus(pre[j]);
    return soft - quad;
}

Vector hidden_config(std::uint64_t code, std::size_t n) {
    Vector h(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) h[static_cast<Eigen::Index>(j)] = static_cast<double>((code >> j) & 1U);
    return h;
}

double free_energy_g_enum(const RbmParams& params, const Vector& v) {
    const std::size_t n = params.hidden();
    if (n > kMaxEnumHidden) {
        throw CapacityError("enumeration limited to " + std::to_string(kMaxEnumHidden) + " hidden units, got " +
                            std::to_string(n));
    }
    require_visible(params, v);
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<double> terms(count);
    for (std::uint64_t k = 0; k < count; ++k) terms[k] = -energy(params, v, hidden_config(k, n));
    return log_sum_exp(terms);
}

double hidden_marginal_log_weight(const RbmParams& params, const Vector& h) {
    require_hidden(params, h);
    const Vector s = params.weights * h;
    const Vector inv_var = params.inv_var();
    double acc = params.hbias.dot(h);
    for (Eigen::Index i = 0; i < s.size(); ++i) acc += s[i] * (0.5 * s[i] + params.vbias[i]) * inv_var[i];
    return acc;
}

double exact_log_partition(const RbmParams& params, Backend backend) {
    params.validate();
    const std::size_t n = params.hidden();
    if (n > kMaxEnumHidden) {
        throw CapacityError("exact log partition limited to " + std::to_string(kMaxEnumHidden) +
                            " hidden units, got " + std::to_string(n));
    }
    const double gaussian = 0.5 * static_cast<double>(params.visible()) * std::log(2.0 * std::numbers::pi) +
                            0.5 * params.log_var.sum();
    return gaussian + kernels::hidden_log_sum(params, backend);
}

void LseQProblem::validate(double tol) const {
    if (coeffs.empty()) throw DomainError("lse_q problem needs at least one term");
    if (quad_terms.size() != coeffs.size() || lin_terms.size() != coeffs.size()) {
        throw ShapeError("lse_q term lists differ in length");
    }
    const Eigen::Index d = lin_terms.front().size();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (!(coeffs[i] >= 0.0) || !std::isfinite(coeffs[i])) throw DomainError("lse_q coefficients must be >= 0");
        if (lin_terms[i].size() != d || quad_terms[i].rows() != d || quad_terms[i].cols() != d) {
            throw ShapeError("lse_q term " + std::to_string(i) + " has the wrong dimension");
        }
        const Matrix& a = quad_terms[i];
        if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, a.cwiseAbs().maxCoeff())) {
            throw DomainError("lse_q quadratic term " + std::to_string(i) + " is not symmetric");
        }
        if (d > 0) {
            Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
            if (eig.eigenvalues().minCoeff() < -tol) {
                throw DomainError("lse_q quadratic term " + std::to_string(i) + " is not positive semi-definite");
            }
        }
    }
}

ValueGrad lse_q_value_grad(const LseQProblem& problem, const Vector& u) {
    problem.validate();
    if (u.size() != static_cast<Eigen::Index>(problem.dim())) throw ShapeError("lse_q point has the wrong dimension");
    if (!u.allFinite()) throw DomainError("lse_q point contains non-finite entries");

    const std::size_t terms = problem.coeffs.size();
    std::vector<double> exponents(terms, -std::numeric_limits<double>::infinity());
    std::vector<Vector> slopes(terms);
    for (std::size_t i = 0; i < terms; ++i) {
        slopes[i] = problem.quad_terms[i] * u + problem.lin_terms[i];
        if (problem.coeffs[i] > 0.0) {
            exponents[i] = std::log(problem.coeffs[i]) + 0.5 * u.dot(problem.quad_terms[i] * u) +
                           problem.lin_terms[i].dot(u);
        }
    }
    const double value = log_sum_exp(exponents);
    if (!std::isfinite(value)) throw DomainError("lse_q value is not finite (all coefficients zero?)");

    ValueGrad out{value, Vector::Zero(u.size())};
    for (std::size_t i = 0; i < terms; ++i) {
        if (problem.coeffs[i] > 0.0) out.grad += std::exp(exponents[i] - value) * slopes[i];
    }
    return out;
}

}  // namespace gbrbm
