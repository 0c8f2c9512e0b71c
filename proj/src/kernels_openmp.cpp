#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kernels_impl.hpp"

namespace gbrbm::kernels {

namespace {

std::size_t block_count(std::size_t items, std::size_t block) { return (items + block - 1) / block; }

// Fixed-shape binary tree over `parts`; the result depends only on parts.size().
ParamGrad pairwise_reduce(std::vector<ParamGrad>& parts) {
    for (std::size_t stride = 1; stride < parts.size(); stride *= 2) {
        for (std::size_t i = 0; i + stride < parts.size(); i += 2 * stride) parts[i] += parts[i + stride];
    }
    return std::move(parts.front());
}

}  // namespace

double pairwise_sum(std::span<const double> parts) {
    if (parts.empty()) return 0.0;
    if (parts.size() == 1) return parts.front();
    const std::size_t half = parts.size() / 2;
    return pairwise_sum(parts.first(half)) + pairwise_sum(parts.subspan(half));
}

namespace openmp {

SampleMatrix hidden_probs(const RbmParams& params, const SampleMatrix& v) {
    const Vector inv_var = params.inv_var();
    SampleMatrix out(v.rows(), params.weights.cols());
    const auto rows = static_cast<std::ptrdiff_t>(v.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const Vector scaled = v.row(r).transpose().cwiseProduct(inv_var);
        const Vector pre = params.hbias + params.weights.transpose() * scaled;
        out.row(r) = pre.unaryExpr([](double x) { return sigmoid(x); }).transpose();
    }
    return out;
}

ParamGrad mean_positive_stats(const RbmParams& params, const SampleMatrix& v, bool with_logvar) {
    const std::size_t rows = static_cast<std::size_t>(v.rows());
    const Vector inv_var = params.inv_var();
    const std::size_t blocks = block_count(rows, kRowBlock);
    std::vector<ParamGrad> parts(blocks);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
        const auto first = static_cast<Eigen::Index>(static_cast<std::size_t>(b) * kRowBlock);
        const auto len = static_cast<Eigen::Index>(std::min(kRowBlock, rows - static_cast<std::size_t>(first)));
        const SampleMatrix scaled = v.middleRows(first, len) * inv_var.asDiagonal();
        SampleMatrix pre = scaled * params.weights;
        pre.rowwise() += params.hbias.transpose();
        const SampleMatrix probs = pre.unaryExpr([](double x) { return sigmoid(x); });

        ParamGrad part;
        part.d_weights = scaled.transpose() * probs;
        part.d_hbias = probs.colwise().sum().transpose();
        if (with_logvar) {
            const SampleMatrix block = v.middleRows(first, len);
            const SampleMatrix drive = probs * params.weights.transpose();
            const SampleMatrix centered = block.rowwise() - params.vbias.transpose();
            const SampleMatrix term = 0.5 * centered.array().square() - block.array() * drive.array();
            part.d_logvar = term.colwise().sum().transpose().cwiseProduct(inv_var);
        }
        parts[static_cast<std::size_t>(b)] = std::move(part);
    }
    ParamGrad total = pairwise_reduce(parts);
    total *= 1.0 / static_cast<double>(rows);
    return total;
}

namespace {

// Log-weights of hidden configurations [first, first + len).
void config_log_weights(const RbmParams& params, const Vector& inv_var, std::uint64_t first, std::size_t len,
                        std::vector<double>& out) {
    const std::size_t n = params.hidden();
    out.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
        const Vector h = hidden_config(first + k, n);
        const Vector s = params.weights * h;
        double acc = params.hbias.dot(h);
        acc += (s.array() * (0.5 * s.array() + params.vbias.array()) * inv_var.array()).sum();
        out[k] = acc;
    }
}

struct BlockLogSum {
    double peak = -std::numeric_limits<double>::infinity();
    double scaled_sum = 0.0;
};

std::vector<BlockLogSum> block_log_sums(const RbmParams& params) {
    const std::uint64_t count = std::uint64_t{1} << params.hidden();
    const std::size_t blocks = block_count(count, kConfigBlock);
    const Vector inv_var = params.inv_var();
    std::vector<BlockLogSum> sums(blocks);
#pragma omp parallel
    {
        std::vector<double> lw;
#pragma omp for schedule(static)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
            const std::uint64_t first = static_cast<std::uint64_t>(b) * kConfigBlock;
            config_log_weights(params, inv_var, first, static_cast<std::size_t>(std::min<std::uint64_t>(kConfigBlock, count - first)), lw);
            BlockLogSum s;
            s.peak = *std::max_element(lw.begin(), lw.end());
            for (double x : lw) s.scaled_sum += std::exp(x - s.peak);
            sums[static_cast<std::size_t>(b)] = s;
        }
    }
    return sums;
}

double combine_log_sums(const std::vector<BlockLogSum>& sums) {
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& s : sums) peak = std::max(peak, s.peak);
    std::vector<double> rescaled(sums.size());
    for (std::size_t b = 0; b < sums.size(); ++b) rescaled[b] = sums[b].scaled_sum * std::exp(sums[b].peak - peak);
    return peak + std::log(pairwise_sum(rescaled));
}

}  // namespace

double hidden_log_sum(const RbmParams& params) { return combine_log_sums(block_log_sums(params)); }

ParamGrad model_expectation(const RbmParams& params, bool with_logvar) {
    const std::size_t n = params.hidden();
    const std::uint64_t count = std::uint64_t{1} << n;
    const std::size_t blocks = block_count(count, kConfigBlock);
    const Vector inv_var = params.inv_var();
    const double log_norm = hidden_log_sum(params);
    std::vector<ParamGrad> parts(blocks);

#pragma omp parallel
    {
        std::vector<double> lw;
#pragma omp for schedule(static)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
            const std::uint64_t first = static_cast<std::uint64_t>(b) * kConfigBlock;
            const auto len = static_cast<std::size_t>(std::min<std::uint64_t>(kConfigBlock, count - first));
            config_log_weights(params, inv_var, first, len, lw);
            ParamGrad part = ParamGrad::zeros(params.dims(), with_logvar);
            for (std::size_t k = 0; k < len; ++k) {
                const double p = std::exp(lw[k] - log_norm);
                const Vector h = hidden_config(first + k, n);
                const Vector s = params.weights * h;
                const Vector mean_scaled = (params.vbias + s).cwiseProduct(inv_var);
                part.d_weights.noalias() += (p * mean_scaled) * h.transpose();
                part.d_hbias += p * h;
                if (with_logvar) {
                    *part.d_logvar += p * (0.5 - (inv_var.array() * s.array() *
                                                  (0.5 * s.array() + params.vbias.array())))
                                              .matrix();
                }
            }
            parts[static_cast<std::size_t>(b)] = std::move(part);
        }
    }
    return pairwise_reduce(parts);
}

}  // namespace openmp

double ais_particle(const RbmParams& params, std::span<const double> betas, RngStream rng) {
    const Vector inv_var = params.inv_var();
    const Vector std_dev = (0.5 * params.log_var.array()).exp().matrix();
    const Eigen::Index m = params.weights.rows();
    const Eigen::Index n = params.weights.cols();

    // Base model (zero coupling): v ~ Normal(b, sigma^2).
    Vector v(m);
    for (Eigen::Index i = 0; i < m; ++i) v[i] = params.vbias[i] + std_dev[i] * rng.normal();

    Vector h(n);
    double log_weight = 0.0;
    for (std::size_t k = 0; k + 1 < betas.size(); ++k) {
        const Vector drive = params.weights.transpose() * v.cwiseProduct(inv_var);
        for (Eigen::Index j = 0; j < n; ++j) {
            log_weight += softplus(params.hbias[j] + betas[k + 1] * drive[j]) -
                          softplus(params.hbias[j] + betas[k] * drive[j]);
        }
        if (k + 2 == betas.size()) break;
        // One Gibbs pair leaving the beta_{k+1} distribution invariant.
        const double beta = betas[k + 1];
        for (Eigen::Index j = 0; j < n; ++j) h[j] = rng.bernoulli(sigmoid(params.hbias[j] + beta * drive[j])) ? 1.0 : 0.0;
        const Vector mean = params.vbias + beta * (params.weights * h);
        for (Eigen::Index i = 0; i < m; ++i) v[i] = mean[i] + std_dev[i] * rng.normal();
    }
    return log_weight;
}

}  // namespace gbrbm::kernels
