#include "gbrbm/sampling.hpp"

#include <cmath>
#include <string>

namespace gbrbm {

namespace {

void check_visible(const RbmParams& params, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != params.visible()) {
        throw ShapeError("visible vector has " + std::to_string(v.size()) + " entries, model has " +
                         std::to_string(params.visible()));
    }
}

void check_hidden(const RbmParams& params, const Vector& h) {
    if (static_cast<std::size_t>(h.size()) != params.hidden()) {
        throw ShapeError("hidden vector has " + std::to_string(h.size()) + " entries, model has " +
                         std::to_string(params.hidden()));
    }
}

// Per-call constants shared by both half-steps.
struct Conditionals {
    const RbmParams& params;
    Vector inv_var;
    Vector std_dev;

    explicit Conditionals(const RbmParams& p)
        : params(p), inv_var(p.inv_var()), std_dev((0.5 * p.log_var.array()).exp().matrix()) {}

    void hidden(const Vector& v, Vector& h, RngStream& rng) const {
        const Vector pre = params.hbias + params.weights.transpose() * v.cwiseProduct(inv_var);
        h.resize(pre.size());
        for (Eigen::Index j = 0; j < pre.size(); ++j) h[j] = rng.bernoulli(sigmoid(pre[j])) ? 1.0 : 0.0;
    }

    void visible(const Vector& h, Vector& v, RngStream& rng) const {
        const Vector mean = params.vbias + params.weights * h;
        v.resize(mean.size());
        for (Eigen::Index i = 0; i < mean.size(); ++i) v[i] = mean[i] + std_dev[i] * rng.normal();
    }
};

}  // namespace

Vector sample_hidden(const RbmParams& params, const Vector& v, RngStream& rng) {
    check_visible(params, v);
    Vector h;
    Conditionals(params).hidden(v, h, rng);
    return h;
}

Vector sample_visible(const RbmParams& params, const Vector& h, RngStream& rng) {
    check_hidden(params, h);
    for (Eigen::Index j = 0; j < h.size(); ++j) {
        if (h[j] != 0.0 && h[j] != 1.0) throw DomainError("hidden vector must be binary");
    }
    Vector v;
    Conditionals(params).visible(h, v, rng);
    return v;
}

void gibbs_advance(const RbmParams& params, ChainState& state, std::size_t k, RngStream& rng) {
    check_visible(params, state.visible);
    const Conditionals cond(params);
    for (std::size_t step = 0; step < k; ++step) {
        cond.hidden(state.visible, state.hidden, rng);
        cond.visible(state.hidden, state.visible, rng);
    }
    state.step_count += k;
}

ChainState gibbs_chain(const RbmParams& params, const Vector& init_v, std::size_t k, RngStream& rng) {
    if (k == 0) throw DomainError("gibbs_chain needs k >= 1");
    ChainState state{init_v, Vector::Zero(static_cast<Eigen::Index>(params.hidden())), 0};
    gibbs_advance(params, state, k, rng);
    return state;
}

}  // namespace gbrbm
