// Straightforward serial loops. Kept as the oracle for the OpenMP kernels.

#include <cmath>
#include <vector>

#include "kernels_impl.hpp"

namespace gbrbm::kernels::reference {

SampleMatrix hidden_probs(const RbmParams& params, const SampleMatrix& v) {
    const Eigen::Index rows = v.rows();
    const Eigen::Index m = v.cols();
    const Eigen::Index n = params.weights.cols();
    const Vector inv_var = params.inv_var();
    SampleMatrix out(rows, n);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double pre = params.hbias[j];
            for (Eigen::Index i = 0; i < m; ++i) pre += params.weights(i, j) * v(r, i) * inv_var[i];
            out(r, j) = sigmoid(pre);
        }
    }
    return out;
}

ParamGrad mean_positive_stats(const RbmParams& params, const SampleMatrix& v, bool with_logvar) {
    const Eigen::Index rows = v.rows();
    const Eigen::Index m = v.cols();
    const Eigen::Index n = params.weights.cols();
    const Vector inv_var = params.inv_var();
    const SampleMatrix probs = hidden_probs(params, v);
    ParamGrad acc = ParamGrad::zeros(params.dims(), with_logvar);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) acc.d_weights(i, j) += v(r, i) * inv_var[i] * probs(r, j);
        }
        for (Eigen::Index j = 0; j < n; ++j) acc.d_hbias[j] += probs(r, j);
        if (with_logvar) {
            for (Eigen::Index i = 0; i < m; ++i) {
                double drive = 0.0;
                for (Eigen::Index j = 0; j < n; ++j) drive += params.weights(i, j) * probs(r, j);
                const double centered = v(r, i) - params.vbias[i];
                (*acc.d_logvar)[i] += inv_var[i] * (0.5 * centered * centered - v(r, i) * drive);
            }
        }
    }
    acc *= 1.0 / static_cast<double>(rows);
    return acc;
}

double hidden_log_sum(const RbmParams& params) {
    const std::size_t n = params.hidden();
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<double> terms(count);
    for (std::uint64_t k = 0; k < count; ++k) terms[k] = hidden_marginal_log_weight(params, hidden_config(k, n));
    return log_sum_exp(terms);
}

ParamGrad model_expectation(const RbmParams& params, bool with_logvar) {
    const std::size_t n = params.hidden();
    const Eigen::Index m = params.weights.rows();
    const std::uint64_t count = std::uint64_t{1} << n;
    const double log_norm = hidden_log_sum(params);
    const Vector inv_var = params.inv_var();
    ParamGrad acc = ParamGrad::zeros(params.dims(), with_logvar);
    for (std::uint64_t k = 0; k < count; ++k) {
        const Vector h = hidden_config(k, n);
        const double p = std::exp(hidden_marginal_log_weight(params, h) - log_norm);
        const Vector s = params.weights * h;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double mean_scaled = (params.vbias[i] + s[i]) * inv_var[i];
            for (Eigen::Index j = 0; j < h.size(); ++j) acc.d_weights(i, j) += p * h[j] * mean_scaled;
        }
        acc.d_hbias += p * h;
        if (with_logvar) {
            for (Eigen::Index i = 0; i < m; ++i) {
                (*acc.d_logvar)[i] += p * (0.5 - inv_var[i] * s[i] * (0.5 * s[i] + params.vbias[i]));
            }
        }
    }
    return acc;
}

}  // namespace gbrbm::kernels::reference
