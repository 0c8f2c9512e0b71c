#include <doctest.h>

#include <cmath>

#include "gbrbm/gradients.hpp"
#include "support.hpp"

using namespace gbrbm;
using testing::close_rel;
using testing::random_params;
using testing::random_vector;

namespace {

SampleMatrix single_row(const Vector& v) {
    SampleMatrix out(1, v.size());
    out.row(0) = v.transpose();
    return out;
}

// Central differences of the brute-force log-likelihood oracle.
ParamGrad oracle_fd(const RbmParams& params, const Vector& v, double eps = 1e-5) {
    const auto ll = [&v](const RbmParams& p) { return testing::log_unnormalized(p, v) - testing::log_partition(p); };
    const auto central = [&](auto&& at) {
        RbmParams p = params;
        const double x0 = at(p);
        at(p) = x0 + eps;
        const double up = ll(p);
        at(p) = x0 - eps;
        return (up - ll(p)) / (2 * eps);
    };
    ParamGrad out = ParamGrad::zeros(params.dims(), true);
    for (Eigen::Index i = 0; i < params.weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < params.weights.cols(); ++j) {
            out.d_weights(i, j) = central([=](RbmParams& p) -> double& { return p.weights(i, j); });
        }
        (*out.d_logvar)[i] = central([=](RbmParams& p) -> double& { return p.log_var[i]; });
    }
    for (Eigen::Index j = 0; j < params.hbias.size(); ++j) {
        out.d_hbias[j] = central([=](RbmParams& p) -> double& { return p.hbias[j]; });
    }
    return out;
}

int count_mismatches(const ParamGrad& a, const ParamGrad& b, double rel, double floor) {
    int bad = 0;
    for (Eigen::Index k = 0; k < a.d_weights.size(); ++k) {
        bad += !close_rel(a.d_weights.data()[k], b.d_weights.data()[k], rel, floor);
    }
    for (Eigen::Index k = 0; k < a.d_hbias.size(); ++k) bad += !close_rel(a.d_hbias[k], b.d_hbias[k], rel, floor);
    if (a.d_logvar && b.d_logvar) {
        for (Eigen::Index k = 0; k < a.d_logvar->size(); ++k) {
            bad += !close_rel((*a.d_logvar)[k], (*b.d_logvar)[k], rel, floor);
        }
    }
    return bad;
}

// Exact model sample: h from its enumerated marginal, then v | h.
Vector exact_model_sample(const RbmParams& p, RngStream& rng) {
    const std::size_t n = p.hidden();
    std::vector<double> logs;
    for (std::uint64_t code = 0; code < (1ULL << n); ++code) {
        const Vector h = testing::bits(code, n);
        double t = p.hbias.dot(h);
        for (Eigen::Index i = 0; i < p.vbias.size(); ++i) {
            const double w = p.weights.row(i).dot(h);
            t += (w * w + 2 * w * p.vbias[i]) / (2 * std::exp(p.log_var[i]));
        }
        logs.push_back(t);
    }
    const double norm = testing::lse(logs);
    double u = rng.uniform();
    std::uint64_t code = 0;
    for (; code + 1 < logs.size(); ++code) {
        u -= std::exp(logs[code] - norm);
        if (u <= 0.0) break;
    }
    const Vector h = testing::bits(code, n);
    Vector v(p.vbias.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = p.vbias[i] + p.weights.row(i).dot(h) + std::exp(0.5 * p.log_var[i]) * rng.normal();
    }
    return v;
}

}  // namespace

TEST_CASE("grad_g examples") {
    RbmParams zero(ModelDims{3, 2});
    Vector v(3);
    v << 1.0, -2.0, 0.5;
    const ParamGrad g = grad_g(zero, single_row(v));
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) CHECK(g.d_weights(i, j) == 0.5 * v[i]);
    }
    CHECK((g.d_hbias.array() == 0.5).all());
    CHECK_FALSE(g.d_logvar.has_value());

    RngStream rng(1, 0);
    const RbmParams p = random_params(3, 4, rng);
    const ParamGrad at_zero = grad_g(p, single_row(Vector::Zero(3)));
    CHECK(at_zero.d_weights.isZero());
    CHECK(at_zero.d_hbias.isApprox(hidden_activation(p, Vector::Zero(3)), 1e-15));
}

TEST_CASE("grad_g matches finite differences of the closed-form g") {
    RngStream rng(2, 0);
    const double eps = 1e-5;
    for (int t = 0; t < 20; ++t) {
        const RbmParams p = random_params(4, 3, rng);
        const Vector v = random_vector(4, rng, 2.0);
        const ParamGrad g = grad_g(p, single_row(v), VarianceMode::learned);
        for (Eigen::Index i = 0; i < 4; ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) {
                RbmParams a = p, b = p;
                a.weights(i, j) += eps;
                b.weights(i, j) -= eps;
                CHECK(close_rel(g.d_weights(i, j), (free_energy_g(a, v) - free_energy_g(b, v)) / (2 * eps), 1e-5, 1e-8));
            }
            RbmParams a = p, b = p;
            a.log_var[i] += eps;
            b.log_var[i] -= eps;
            CHECK(close_rel((*g.d_logvar)[i], (free_energy_g(a, v) - free_energy_g(b, v)) / (2 * eps), 1e-5, 1e-8));
        }
    }
}

TEST_CASE("grad_f_estimate reduces to grad_g and averages linearly") {
    RngStream rng(3, 0);
    const RbmParams p = random_params(3, 4, rng);
    const Vector v1 = random_vector(3, rng), v2 = random_vector(3, rng);
    std::vector<ChainState> same(3, ChainState{v1, Vector::Zero(4), 0});
    const ParamGrad est = grad_f_estimate(p, same);
    const ParamGrad direct = grad_g(p, single_row(v1));
    CHECK(est.d_weights.isApprox(direct.d_weights, 1e-14));
    CHECK(est.d_hbias.isApprox(direct.d_hbias, 1e-14));

    std::vector<ChainState> two{ChainState{v1, Vector::Zero(4), 0}, ChainState{v2, Vector::Zero(4), 0}};
    ParamGrad mean = grad_g(p, single_row(v1));
    mean += grad_g(p, single_row(v2));
    mean *= 0.5;
    const ParamGrad pair = grad_f_estimate(p, two);
    CHECK(pair.d_weights.isApprox(mean.d_weights, 1e-14));
    CHECK(pair.d_hbias.isApprox(mean.d_hbias, 1e-14));
    CHECK_THROWS_AS(grad_f_estimate(p, std::span<const ChainState>{}), DomainError);
}

TEST_CASE("grad_f_exact examples") {
    RbmParams p(ModelDims{3, 2});
    p.vbias << 1.0, -2.0, 0.5;
    p.log_var << 0.0, std::log(2.0), std::log(0.5);
    const ParamGrad g = grad_f_exact(p);
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            CHECK(g.d_weights(i, j) == doctest::Approx(p.vbias[i] / (2 * std::exp(p.log_var[i]))).epsilon(1e-12));
        }
    }
    CHECK(g.d_hbias.isApprox(Vector::Constant(2, 0.5), 1e-12));

    RngStream rng(4, 0);
    RbmParams off = random_params(3, 4, rng);
    off.hbias.setConstant(-1e3);
    CHECK(grad_f_exact(off, VarianceMode::fixed).max_abs() <= 1e-6);
}

TEST_CASE("analytic log-likelihood gradient matches brute-force finite differences") {
    RngStream rng(5, 0);
    int bad = 0, bad_lib = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t m = 1 + t % 6;
        const std::size_t n = 1 + (t * 5) % 8;
        const RbmParams p = random_params(m, n, rng);
        const Vector v = random_vector(m, rng, 1.5);
        const ParamGrad analytic = grad_g(p, single_row(v), VarianceMode::learned) -
                                   grad_f_exact(p, VarianceMode::learned);
        bad += count_mismatches(analytic, oracle_fd(p, v), 1e-5, 1e-8);
        bad_lib += count_mismatches(analytic, numerical_gradient(p, v, 1e-5), 1e-5, 1e-8);
    }
    CHECK(bad == 0);
    CHECK(bad_lib == 0);
}

TEST_CASE("numerical_gradient argument checks and symmetry") {
    RbmParams zero(ModelDims{3, 2});
    CHECK_THROWS_AS(numerical_gradient(zero, Vector::Zero(3), 0.0), DomainError);
    const ParamGrad g = numerical_gradient(zero, Vector::Zero(3), 1e-5);
    CHECK(g.d_weights.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("grad_logvar examples and finite-difference agreement") {
    RngStream rng(6, 0);
    const RbmParams p = random_params(3, 2, rng);
    SampleMatrix batch(4, 3);
    for (Eigen::Index k = 0; k < batch.size(); ++k) batch.data()[k] = rng.normal();
    CHECK(grad_logvar(p, batch, batch).isZero());

    RbmParams zero(ModelDims{3, 2});
    SampleMatrix model(5, 3);
    for (Eigen::Index k = 0; k < model.size(); ++k) model.data()[k] = rng.normal();
    const Vector expected =
        0.5 * (batch.cwiseAbs2().colwise().mean() - model.cwiseAbs2().colwise().mean()).transpose();
    CHECK(grad_logvar(zero, batch, model).isApprox(expected, 1e-13));

    // Data term at v, model term replaced by the exact expectation.
    for (int t = 0; t < 10; ++t) {
        const RbmParams q = random_params(3, 3, rng);
        const Vector v = random_vector(3, rng);
        const Vector analytic = *grad_g(q, single_row(v), VarianceMode::learned).d_logvar -
                                *grad_f_exact(q, VarianceMode::learned).d_logvar;
        const ParamGrad fd = oracle_fd(q, v);
        for (Eigen::Index i = 0; i < 3; ++i) CHECK(close_rel(analytic[i], (*fd.d_logvar)[i], 1e-4, 1e-8));
    }
}

TEST_CASE("Monte-Carlo estimate converges to the exact expectation") {
    RngStream rng(7, 0);
    const RbmParams p = random_params(3, 3, rng, 0.8);
    const int samples = 10000;
    std::vector<ChainState> chains;
    for (int s = 0; s < samples; ++s) chains.push_back(ChainState{exact_model_sample(p, rng), Vector::Zero(3), 0});
    const ParamGrad est = grad_f_estimate(p, chains);
    const ParamGrad exact = grad_f_exact(p);

    // Per-entry standard errors from the per-sample statistics.
    Matrix sq = Matrix::Zero(3, 3);
    Vector sqh = Vector::Zero(3);
    for (const auto& c : chains) {
        const ParamGrad one = grad_g(p, single_row(c.visible));
        sq += one.d_weights.cwiseAbs2();
        sqh += one.d_hbias.cwiseAbs2();
    }
    const Matrix se = ((sq / samples - est.d_weights.cwiseAbs2()) / samples).cwiseSqrt();
    const Vector seh = ((sqh / samples - est.d_hbias.cwiseAbs2()) / samples).cwiseSqrt();
    CHECK(((est.d_weights - exact.d_weights).cwiseAbs().array() <= 3 * se.array() + 1e-12).all());
    CHECK(((est.d_hbias - exact.d_hbias).cwiseAbs().array() <= 3 * seh.array() + 1e-12).all());
    CHECK((est.d_weights - exact.d_weights).cwiseAbs().maxCoeff() <= 0.02);
    CHECK((est.d_hbias - exact.d_hbias).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("gradient containers have no visible-bias component") {
    const ParamGrad g = ParamGrad::zeros(ModelDims{4, 3}, true);
    CHECK(g.d_weights.rows() == 4);
    CHECK(g.d_hbias.size() == 3);
    CHECK(g.d_logvar->size() == 4);
}
