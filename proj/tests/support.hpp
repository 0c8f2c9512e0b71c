#pragma once

// Independent oracles and fixtures shared by the test binaries. Nothing here
// calls the library's own enumeration or closed forms.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "gbrbm/model.hpp"
#include "gbrbm/rng.hpp"

namespace testing {

using gbrbm::Matrix;
using gbrbm::RbmParams;
using gbrbm::Vector;

inline double uniform_in(gbrbm::RngStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Entries U[-scale, scale]; z in [-zscale, zscale].
inline RbmParams random_params(std::size_t m, std::size_t n, gbrbm::RngStream& rng, double scale = 1.0,
                               double zscale = 1.0) {
    RbmParams p(gbrbm::ModelDims{m, n});
    for (Eigen::Index i = 0; i < p.weights.size(); ++i) p.weights.data()[i] = uniform_in(rng, -scale, scale);
    for (Eigen::Index i = 0; i < p.vbias.size(); ++i) p.vbias[i] = uniform_in(rng, -scale, scale);
    for (Eigen::Index i = 0; i < p.hbias.size(); ++i) p.hbias[i] = uniform_in(rng, -scale, scale);
    for (Eigen::Index i = 0; i < p.log_var.size(); ++i) p.log_var[i] = uniform_in(rng, -zscale, zscale);
    return p;
}

inline Vector random_vector(std::size_t m, gbrbm::RngStream& rng, double scale = 1.0) {
    Vector v(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform_in(rng, -scale, scale);
    return v;
}

inline double lse(const std::vector<double>& xs) {
    double hi = -INFINITY;
    for (double x : xs) hi = std::max(hi, x);
    double s = 0.0;
    for (double x : xs) s += std::exp(x - hi);
    return hi + std::log(s);
}

inline Vector bits(std::uint64_t code, std::size_t n) {
    Vector h(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) h[static_cast<Eigen::Index>(j)] = static_cast<double>((code >> j) & 1U);
    return h;
}

// Energy written out term by term.
inline double energy_terms(const RbmParams& p, const Vector& v, const Vector& h) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double var = std::exp(p.log_var[i]);
        e += (v[i] - p.vbias[i]) * (v[i] - p.vbias[i]) / (2.0 * var);
        for (Eigen::Index j = 0; j < h.size(); ++j) e -= p.weights(i, j) * v[i] * h[j] / var;
    }
    for (Eigen::Index j = 0; j < h.size(); ++j) e -= p.hbias[j] * h[j];
    return e;
}

// log sum_h exp(-E(v, h)) by brute force.
inline double log_unnormalized(const RbmParams& p, const Vector& v) {
    const std::size_t n = p.hidden();
    std::vector<double> terms;
    for (std::uint64_t code = 0; code < (1ULL << n); ++code) terms.push_back(-energy_terms(p, v, bits(code, n)));
    return lse(terms);
}

// log Z: for each h, the visible integral is a product of 1-D Gaussian integrals
// int exp(-(v-b)^2/(2 s2) + w v / s2) dv = sqrt(2 pi s2) exp((w^2 + 2 w b)/(2 s2)).
inline double log_partition(const RbmParams& p) {
    const std::size_t n = p.hidden();
    std::vector<double> terms;
    for (std::uint64_t code = 0; code < (1ULL << n); ++code) {
        const Vector h = bits(code, n);
        double t = p.hbias.dot(h);
        for (Eigen::Index i = 0; i < p.vbias.size(); ++i) {
            const double s2 = std::exp(p.log_var[i]);
            const double w = p.weights.row(i).dot(h);
            t += 0.5 * std::log(2.0 * std::numbers::pi * s2) + (w * w + 2.0 * w * p.vbias[i]) / (2.0 * s2);
        }
        terms.push_back(t);
    }
    return lse(terms);
}

// log Z for m = 1 by trapezoidal quadrature of sum_h exp(-E) over a wide grid.
inline double log_partition_quadrature_1d(const RbmParams& p, double half_width = 40.0, int points = 400001) {
    const double step = 2.0 * half_width / (points - 1);
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        Vector v(1);
        v[0] = p.vbias[0] - half_width + k * step;
        const double w = (k == 0 || k == points - 1) ? 0.5 : 1.0;
        logs.push_back(log_unnormalized(p, v) + std::log(w * step));
    }
    return lse(logs);
}

inline double mean_log_likelihood(const RbmParams& p, const gbrbm::SampleMatrix& data) {
    const double log_z = log_partition(p);
    double s = 0.0;
    for (Eigen::Index r = 0; r < data.rows(); ++r) s += log_unnormalized(p, data.row(r).transpose()) - log_z;
    return s / static_cast<double>(data.rows());
}

// Agreement rule used for analytic-vs-numeric comparisons.
inline bool close_rel(double a, double b, double rel, double abs_floor) {
    const double diff = std::abs(a - b);
    return diff <= abs_floor || diff <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace testing
