#include "gbrbm/training.hpp"

#include "gbrbm/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace gbrbm {

namespace {

constexpr std::uint64_t kChainTag = 0xC4A1'0000'0000'0000ULL;

void check_batch(const TrainState& state, const SampleMatrix& batch, const TrainConfig& config) {
    if (batch.rows() == 0) throw DomainError("empty mini-batch");
    if (static_cast<std::size_t>(batch.cols()) != state.params.visible()) {
        throw ShapeError("mini-batch dimension does not match the model");
    }
    config.validate();
}

// Chains restarted at the batch rows, one stream per slot.
std::vector<ChainState> chains_from_batch(const SampleMatrix& batch, std::size_t hidden) {
    std::vector<ChainState> chains(static_cast<std::size_t>(batch.rows()));
    for (std::size_t s = 0; s < chains.size(); ++s) {
        chains[s].visible = batch.row(static_cast<Eigen::Index>(s)).transpose();
        chains[s].hidden = Vector::Zero(static_cast<Eigen::Index>(hidden));
    }
    return chains;
}

std::vector<RngStream> batch_streams(const TrainState& state, const TrainConfig& config, std::size_t slots) {
    std::vector<RngStream> streams;
    streams.reserve(slots);
    const std::size_t first = state.batch_in_epoch * config.batch_size;
    for (std::size_t s = 0; s < slots; ++s) streams.push_back(chain_stream(config.seed, state.epoch, first + s));
    return streams;
}

}  // namespace

std::string to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::cd: return "cd";
        case Algorithm::pcd: return "pcd";
        case Algorithm::sdcp: return "sdcp";
        case Algorithm::sdcp_var: return "sdcp_var";
    }
    return "cd";
}

Algorithm parse_algorithm(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    std::replace(lower.begin(), lower.end(), '-', '_');
    if (lower == "cd") return Algorithm::cd;
    if (lower == "pcd") return Algorithm::pcd;
    if (lower == "sdcp") return Algorithm::sdcp;
    if (lower == "sdcp_var") return Algorithm::sdcp_var;
    throw DomainError("unknown algorithm '" + name + "' (expected cd, pcd, sdcp or sdcp_var)");
}

void TrainConfig::validate() const {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("learning rate must be finite and >= 0");
    if (batch_size == 0) throw DomainError("batch size must be >= 1");
    if (epochs == 0) throw DomainError("epoch count must be >= 1");
    if (is_sdcp()) {
        if (inner_iters == 0 || inner_gibbs_steps == 0) throw DomainError("S-DCP needs d >= 1 and K' >= 1");
    } else if (gibbs_steps == 0) {
        throw DomainError("CD/PCD needs K >= 1");
    }
    if (!std::isfinite(variance_lr_scale)) throw DomainError("variance_lr_scale must be finite");
}

RngStream chain_stream(std::uint64_t seed, std::size_t epoch, std::size_t position) {
    return RngStream(seed, mix_key(kChainTag ^ static_cast<std::uint64_t>(epoch), position));
}

RbmParams init_params(ModelDims dims, const Dataset& data, double tau, RngStream& rng) {
    if (data.size() == 0) throw DomainError("init_params needs a nonempty dataset");
    if (data.dims() != dims.visible) throw ShapeError("dataset dimension does not match the model");
    if (!(tau > 0.0)) throw DomainError("tau must be positive");

    RbmParams params(dims);
    const double bound = 6.0 / std::sqrt(static_cast<double>(dims.visible + dims.hidden));
    for (Eigen::Index j = 0; j < params.weights.cols(); ++j) {
        for (Eigen::Index i = 0; i < params.weights.rows(); ++i) {
            params.weights(i, j) = bound * (2.0 * rng.uniform() - 1.0);
        }
    }
    params.vbias = data.mean();
    const double bias_norm = params.vbias.squaredNorm();
    for (Eigen::Index j = 0; j < params.hbias.size(); ++j) {
        params.hbias[j] = -0.5 * ((params.vbias - params.weights.col(j)).squaredNorm() - bias_norm) + std::log(tau);
    }
    return params;
}

TrainState make_train_state(RbmParams params, const TrainConfig& config) {
    TrainState state;
    state.params = std::move(params);
    state.rng = RngStream(config.seed, kRunStreamId);
    return state;
}

void apply_ascent(RbmParams& params, const ParamGrad& positive, const ParamGrad& negative, double eta) {
    params.weights += eta * (positive.d_weights - negative.d_weights);
    params.hbias += eta * (positive.d_hbias - negative.d_hbias);
}

TrainState cd_step(TrainState state, const SampleMatrix& batch, const TrainConfig& config, bool persistent) {
    check_batch(state, batch, config);
    const auto slots = static_cast<std::size_t>(batch.rows());
    std::vector<ChainState> fresh;
    if (persistent) {
        if (state.persistent_chains.empty()) state.persistent_chains = chains_from_batch(batch, state.params.hidden());
        if (state.persistent_chains.size() != slots) {
            throw ShapeError("persistent chain pool size differs from the mini-batch size");
        }
    } else {
        fresh = chains_from_batch(batch, state.params.hidden());
    }
    std::vector<ChainState>& chains = persistent ? state.persistent_chains : fresh;
    auto streams = batch_streams(state, config, slots);

    const VarianceMode mode = config.learns_variance() ? VarianceMode::learned : VarianceMode::fixed;
    kernels::gibbs_chains(state.params, chains, streams, config.gibbs_steps, Backend::openmp);
    const ParamGrad positive = grad_g(state.params, batch, mode);
    const ParamGrad negative = grad_f_estimate(state.params, chains, mode);

    apply_ascent(state.params, positive, negative, config.eta);
    if (mode == VarianceMode::learned) {
        state.params.log_var += (config.eta * config.variance_lr_scale) * (*positive.d_logvar - *negative.d_logvar);
    }
    ++state.update_count;
    return state;
}

namespace {

// Shared inner loop of both S-DCP variants; returns the final chain ends.
std::vector<ChainState> sdcp_inner(TrainState& state, const SampleMatrix& batch, const TrainConfig& config) {
    check_batch(state, batch, config);
    const auto slots = static_cast<std::size_t>(batch.rows());
    std::vector<ChainState> chains = chains_from_batch(batch, state.params.hidden());
    auto streams = batch_streams(state, config, slots);

    const ParamGrad held = grad_g(state.params, batch);
    for (std::size_t l = 0; l < config.inner_iters; ++l) {
        kernels::gibbs_chains(state.params, chains, streams, config.inner_gibbs_steps, Backend::openmp);
        const ParamGrad estimate = grad_f_estimate(state.params, chains);
        apply_ascent(state.params, held, estimate, config.eta);
        ++state.update_count;
    }
    return chains;
}

}  // namespace

TrainState sdcp_step(TrainState state, const SampleMatrix& batch, const TrainConfig& config) {
    sdcp_inner(state, batch, config);
    return state;
}

TrainState sdcp_var_step(TrainState state, const SampleMatrix& batch, const TrainConfig& config) {
    const auto chains = sdcp_inner(state, batch, config);
    const Vector step = grad_logvar(state.params, batch, chain_visibles(chains));
    state.params.log_var += (config.eta * config.variance_lr_scale) * step;
    return state;
}

TrainState train_batch(TrainState state, const SampleMatrix& batch, const TrainConfig& config) {
    switch (config.algorithm) {
        case Algorithm::cd: return cd_step(std::move(state), batch, config, false);
        case Algorithm::pcd: return cd_step(std::move(state), batch, config, true);
        case Algorithm::sdcp:
            if (config.learn_variance) return sdcp_var_step(std::move(state), batch, config);
            return sdcp_step(std::move(state), batch, config);
        case Algorithm::sdcp_var: return sdcp_var_step(std::move(state), batch, config);
    }
    return state;
}

TrainState train_epoch(TrainState state, const Dataset& data, const TrainConfig& config) {
    config.validate();
    if (data.size() < config.batch_size) {
        throw DomainError("dataset has " + std::to_string(data.size()) + " samples, fewer than one mini-batch of " +
                          std::to_string(config.batch_size));
    }
    const auto order = shuffle_epoch(data.size(), state.rng);
    const std::size_t batches = data.size() / config.batch_size;
    for (std::size_t b = 0; b < batches; ++b) {
        state.batch_in_epoch = b;
        const std::span<const std::size_t> slice(order.data() + b * config.batch_size, config.batch_size);
        state = train_batch(std::move(state), gather_rows(data.samples, slice), config);
    }
    state.batch_in_epoch = 0;
    ++state.epoch;
    return state;
}

RbmParams dca_exact_step(RbmParams params, const SampleMatrix& data, double eta, std::size_t inner_iters) {
    const ParamGrad held = grad_g(params, data);
    for (std::size_t l = 0; l < inner_iters; ++l) apply_ascent(params, held, grad_f_exact(params), eta);
    return params;
}

CostEstimate cost_model(std::size_t gibbs_steps, std::size_t inner_iters, std::size_t inner_gibbs_steps,
                        std::size_t batch_size, double transition_cost, double gradient_cost) {
    if (gibbs_steps == 0 || inner_iters == 0 || inner_gibbs_steps == 0 || batch_size == 0) {
        throw DomainError("cost model counts must be >= 1");
    }
    if (!(transition_cost > 0.0) || !(gradient_cost >= 0.0)) {
        throw DomainError("cost model needs T > 0 and L >= 0");
    }
    const double nb = static_cast<double>(batch_size);
    CostEstimate out;
    out.cd = nb * (static_cast<double>(gibbs_steps) * transition_cost + 2.0 * gradient_cost);
    out.sdcp = static_cast<double>(inner_iters) * nb *
                   (static_cast<double>(inner_gibbs_steps) * transition_cost + gradient_cost) +
               nb * gradient_cost;
    return out;
}

}  // namespace gbrbm
