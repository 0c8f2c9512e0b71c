#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gbrbm/model.hpp"
#include "support.hpp"

using namespace gbrbm;
using testing::random_params;
using testing::random_vector;

namespace {

RbmParams scalar_model(double w, double b = 0.0, double c = 0.0, double z = 0.0) {
    RbmParams p(ModelDims{1, 1});
    p.weights(0, 0) = w;
    p.vbias[0] = b;
    p.hbias[0] = c;
    p.log_var[0] = z;
    return p;
}

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("parameter construction and validation") {
    CHECK_THROWS_AS(RbmParams(ModelDims{3, 0}), DomainError);
    RbmParams p(ModelDims{3, 2});
    CHECK(p.dims() == ModelDims{3, 2});
    CHECK(p.weights.isZero());
    p.validate();
    p.log_var[1] = NAN;
    CHECK_THROWS(p.validate());
}

TEST_CASE("energy examples") {
    RngStream rng(1, 0);
    RbmParams p = random_params(4, 3, rng);
    CHECK(energy(p, p.vbias, Vector::Zero(3)) == 0.0);

    CHECK(energy(scalar_model(2.0), vec({1.0}), vec({1.0})) == doctest::Approx(-1.5).epsilon(1e-15));

    RbmParams free(ModelDims{3, 2});
    free.vbias = vec({0.5, -1.0, 2.0});
    const Vector v = vec({1.0, 1.0, 1.0});
    const double expected = 0.5 * (v - free.vbias).squaredNorm();
    CHECK(energy(free, v, vec({1.0, 0.0})) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(energy(free, v, vec({1.0, 1.0})) == doctest::Approx(expected).epsilon(1e-15));

    for (int t = 0; t < 20; ++t) {
        const RbmParams q = random_params(5, 4, rng);
        const Vector x = random_vector(5, rng);
        const Vector h = testing::bits(static_cast<std::uint64_t>(t) % 16, 4);
        CHECK(energy(q, x, h) == doctest::Approx(testing::energy_terms(q, x, h)).epsilon(1e-13));
    }
}

TEST_CASE("hidden_activation examples") {
    RbmParams zero(ModelDims{3, 4});
    CHECK((hidden_activation(zero, vec({1.0, -2.0, 3.0})).array() == 0.5).all());
    CHECK(hidden_activation(scalar_model(1.0), vec({1.0}))[0] == doctest::Approx(0.7310585786).epsilon(1e-10));

    RbmParams sat(ModelDims{2, 2});
    sat.hbias.setConstant(1e3);
    const Vector p = hidden_activation(sat, vec({0.0, 0.0}));
    CHECK(p.allFinite());
    CHECK((p.array() >= 1.0 - 1e-12).all());
    sat.hbias.setConstant(-1e3);
    CHECK((hidden_activation(sat, vec({0.0, 0.0})).array() >= 0.0).all());
}

TEST_CASE("visible_conditional_mean examples") {
    RngStream rng(2, 0);
    const RbmParams p = random_params(4, 3, rng);
    CHECK(visible_conditional_mean(p, Vector::Zero(3)) == p.vbias);
    CHECK(visible_conditional_mean(p, vec({0, 1, 0})).isApprox(p.vbias + p.weights.col(1), 1e-15));
    CHECK(visible_conditional_mean(p, Vector::Ones(3)).isApprox(p.vbias + p.weights.rowwise().sum(), 1e-15));
}

TEST_CASE("conditional consistency with the joint") {
    RngStream rng(3, 0);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 1 + t % 6;
        const RbmParams p = random_params(3, n, rng);
        const Vector v = random_vector(3, rng, 2.0);
        const Vector act = hidden_activation(p, v);
        std::vector<double> logs;
        for (std::uint64_t code = 0; code < (1ULL << n); ++code) logs.push_back(-energy(p, v, testing::bits(code, n)));
        const double norm = testing::lse(logs);
        for (std::uint64_t code = 0; code < (1ULL << n); ++code) {
            const Vector h = testing::bits(code, n);
            double prod = 1.0;
            for (std::size_t j = 0; j < n; ++j) prod *= h[j] > 0.5 ? act[j] : 1.0 - act[j];
            worst = std::max(worst, std::abs(std::exp(logs[code] - norm) - prod));
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("free_energy_g examples") {
    RbmParams zero(ModelDims{3, 5});
    const Vector v = vec({1.0, -0.5, 2.0});
    CHECK(free_energy_g(zero, v) == doctest::Approx(-v.squaredNorm() / 2 + 5 * std::log(2.0)).epsilon(1e-15));
    CHECK(free_energy_g(scalar_model(1.0), vec({1.0})) == doctest::Approx(0.8132617).epsilon(1e-7));

    RbmParams one(ModelDims{3, 1});
    one.vbias = vec({0.1, 0.2, 0.3});
    CHECK(free_energy_g_enum(one, v) ==
          doctest::Approx(-(v - one.vbias).squaredNorm() / 2 + std::log(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(free_energy_g_enum(RbmParams(ModelDims{2, 21}), Vector::Zero(2)), CapacityError);
}

TEST_CASE("closed-form g agrees with enumeration and the brute-force oracle") {
    RngStream rng(4, 0);
    double worst = 0.0, worst_oracle = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t m = 1 + t % 8;
        const std::size_t n = 1 + (t * 7) % 10;
        const RbmParams p = random_params(m, n, rng);
        const Vector v = random_vector(m, rng);
        const double closed = free_energy_g(p, v);
        worst = std::max(worst, std::abs(closed - free_energy_g_enum(p, v)));
        worst_oracle = std::max(worst_oracle, std::abs(closed - testing::log_unnormalized(p, v)));
    }
    CHECK(worst <= 1e-9);
    CHECK(worst_oracle <= 1e-9);
}

TEST_CASE("exact_log_partition examples") {
    const double log2pi = std::log(2.0 * std::numbers::pi);
    RbmParams fact(ModelDims{2, 3});
    fact.vbias = vec({3.0, -7.0});
    CHECK(exact_log_partition(fact) == doctest::Approx(log2pi + 3 * std::log(2.0)).epsilon(1e-12));
    CHECK(exact_log_partition(fact) == doctest::Approx(3.9173186).epsilon(1e-7));

    fact.hbias = vec({-1.0, 0.5, 2.0});
    double expected = log2pi;
    for (double c : {-1.0, 0.5, 2.0}) expected += softplus(c);
    CHECK(exact_log_partition(fact) == doctest::Approx(expected).epsilon(1e-12));

    RbmParams hand(ModelDims{2, 1});
    hand.weights(0, 0) = 1.0;
    CHECK(std::abs(exact_log_partition(hand) - (log2pi + std::log(1.0 + std::exp(0.5)))) <= 1e-9);
    CHECK(exact_log_partition(hand) == doctest::Approx(2.8119541).epsilon(1e-7));

    CHECK_THROWS_AS(exact_log_partition(RbmParams(ModelDims{2, 21})), CapacityError);
}

TEST_CASE("exact_log_partition matches the Gaussian-integral oracle and 1-D quadrature") {
    RngStream rng(5, 0);
    for (int t = 0; t < 30; ++t) {
        const RbmParams p = random_params(1 + t % 5, 1 + t % 7, rng);
        CHECK(std::abs(exact_log_partition(p) - testing::log_partition(p)) <= 1e-9);
        CHECK(std::abs(exact_log_partition(p, Backend::reference) - testing::log_partition(p)) <= 1e-9);
    }
    for (int t = 0; t < 5; ++t) {
        const RbmParams p = random_params(1, 3, rng);
        CHECK(std::abs(exact_log_partition(p) - testing::log_partition_quadrature_1d(p)) <= 1e-8);
    }
}

TEST_CASE("log partition is monotone in a uniform hidden-bias shift") {
    RngStream rng(6, 0);
    for (int t = 0; t < 20; ++t) {
        RbmParams p = random_params(3, 4, rng);
        const double base = exact_log_partition(p);
        const double delta = testing::uniform_in(rng, 0.0, 2.0);
        p.hbias.array() += delta;
        const double shifted = exact_log_partition(p);
        CHECK(shifted - base >= -1e-12);
        CHECK(shifted - base <= 4 * delta + 1e-12);
    }
}

TEST_CASE("midpoint convexity of g and f in (W, c)") {
    RngStream rng(7, 0);
    double worst_g = -INFINITY, worst_f = -INFINITY;
    for (int t = 0; t < 200; ++t) {
        RbmParams a = random_params(3, 4, rng, 2.0);
        RbmParams b = a;
        b.weights = random_params(3, 4, rng, 2.0).weights;
        b.hbias = random_vector(4, rng, 2.0);
        RbmParams mid = a;
        mid.weights = 0.5 * (a.weights + b.weights);
        mid.hbias = 0.5 * (a.hbias + b.hbias);
        const Vector v = random_vector(3, rng, 2.0);
        worst_g = std::max(worst_g, free_energy_g(mid, v) - 0.5 * (free_energy_g(a, v) + free_energy_g(b, v)));
        worst_f = std::max(worst_f, exact_log_partition(mid) -
                                        0.5 * (exact_log_partition(a) + exact_log_partition(b)));
    }
    CHECK(worst_g <= 1e-9);
    CHECK(worst_f <= 1e-9);
}

TEST_CASE("stable scalar helpers") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(softplus(1000.0) == doctest::Approx(1000.0));
    CHECK(softplus(-1000.0) >= 0.0);
    const std::vector<double> xs{1000.0, 1000.0};
    CHECK(log_sum_exp(xs) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("lse_q examples") {
    LseQProblem zero;
    zero.quad_terms = {Matrix::Zero(3, 3)};
    zero.lin_terms = {Vector::Zero(3)};
    zero.coeffs = {1.0};
    const ValueGrad z = lse_q_value_grad(zero, vec({1.0, 2.0, 3.0}));
    CHECK(z.value == doctest::Approx(0.0));
    CHECK(z.grad.isZero());

    LseQProblem quad = zero;
    quad.quad_terms = {Matrix::Identity(3, 3)};
    const Vector u = vec({1.0, -2.0, 0.5});
    const ValueGrad q = lse_q_value_grad(quad, u);
    CHECK(q.value == doctest::Approx(0.5 * u.squaredNorm()).epsilon(1e-14));
    CHECK(q.grad.isApprox(u, 1e-14));

    LseQProblem none = zero;
    none.coeffs = {0.0};
    CHECK_THROWS_AS(lse_q_value_grad(none, u), DomainError);
}

namespace {

LseQProblem random_psd_problem(std::size_t dim, std::size_t terms, RngStream& rng) {
    LseQProblem p;
    for (std::size_t k = 0; k < terms; ++k) {
        Matrix g(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = testing::uniform_in(rng, -1.0, 1.0);
        p.quad_terms.push_back(g * g.transpose());
        p.lin_terms.push_back(random_vector(dim, rng));
        p.coeffs.push_back(testing::uniform_in(rng, 0.1, 2.0));
    }
    return p;
}

}  // namespace

TEST_CASE("lse_q gradient matches finite differences and its Hessian is PSD") {
    RngStream rng(8, 0);
    const double h = 1e-5;
    for (int t = 0; t < 50; ++t) {
        const std::size_t dim = 1 + t % 6;
        const LseQProblem p = random_psd_problem(dim, 3, rng);
        const Vector u = random_vector(dim, rng);
        const ValueGrad vg = lse_q_value_grad(p, u);
        Matrix hess(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) {
            Vector up = u, dn = u;
            up[i] += h;
            dn[i] -= h;
            const ValueGrad a = lse_q_value_grad(p, up);
            const ValueGrad b = lse_q_value_grad(p, dn);
            CHECK(testing::close_rel(vg.grad[i], (a.value - b.value) / (2 * h), 1e-5, 1e-8));
            hess.col(static_cast<Eigen::Index>(i)) = (a.grad - b.grad) / (2 * h);
        }
        const Matrix sym = 0.5 * (hess + hess.transpose());
        CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().minCoeff() >= -1e-6);
    }
}
