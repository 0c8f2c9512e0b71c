#include "gbrbm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gbrbm/gradients.hpp"
#include "gbrbm/kernels.hpp"
#include "gbrbm/sampling.hpp"

namespace gbrbm {

std::vector<double> AisConfig::schedule() const {
    validate();
    std::vector<double> betas(num_temps);
    const double last = static_cast<double>(num_temps - 1);
    for (std::size_t k = 0; k < num_temps; ++k) betas[k] = static_cast<double>(k) / last;
    betas.back() = 1.0;
    return betas;
}

void AisConfig::validate() const {
    if (num_particles == 0) throw DomainError("AIS needs at least one particle");
    if (num_temps < 2) throw DomainError("AIS needs at least two temperatures");
}

double base_log_partition(const RbmParams& params) {
    double acc = 0.5 * static_cast<double>(params.visible()) * std::log(2.0 * std::numbers::pi) +
                 0.5 * params.log_var.sum();
    for (Eigen::Index j = 0; j < params.hbias.size(); ++j) acc += softplus(params.hbias[j]);
    return acc;
}

LogZEstimate ais_log_partition(const RbmParams& params, const AisConfig& config, Backend backend) {
    config.validate();
    const auto betas = config.schedule();
    const auto weights = kernels::ais_log_weights(params, betas, config.num_particles,
                                                  RngStream(config.seed, 0xA15), backend);
    for (std::size_t p = 0; p < weights.size(); ++p) {
        if (!std::isfinite(weights[p])) {
            throw NumericalError("AIS log-weight of particle " + std::to_string(p) + " is not finite (" +
                                 std::to_string(weights[p]) + "); parameters may have diverged");
        }
    }
    const double peak = *std::max_element(weights.begin(), weights.end());
    std::vector<double> scaled(weights.size());
    for (std::size_t p = 0; p < weights.size(); ++p) scaled[p] = std::exp(weights[p] - peak);
    const double count = static_cast<double>(weights.size());
    const double log_mean = peak + std::log(kernels::pairwise_sum(scaled) / count);

    const double mean = kernels::pairwise_sum(weights) / count;
    std::vector<double> sq(weights.size());
    for (std::size_t p = 0; p < weights.size(); ++p) sq[p] = (weights[p] - mean) * (weights[p] - mean);

    LogZEstimate out;
    out.log_z = base_log_partition(params) + log_mean;
    out.log_weight_std = std::sqrt(kernels::pairwise_sum(sq) / count);
    out.particles_used = weights.size();
    return out;
}

double avg_log_likelihood(const RbmParams& params, const Dataset& data, double log_z) {
    if (data.size() == 0) throw DomainError("avg_log_likelihood needs a nonempty dataset");
    if (!std::isfinite(log_z)) throw DomainError("log partition estimate is not finite");
    if (data.dims() != params.visible()) throw ShapeError("dataset dimension does not match the model");
    std::vector<double> per_sample(data.size());
    for (std::size_t r = 0; r < data.size(); ++r) {
        per_sample[r] = free_energy_g(params, data.samples.row(static_cast<Eigen::Index>(r)).transpose());
    }
    return kernels::pairwise_sum(per_sample) / static_cast<double>(data.size()) - log_z;
}

std::vector<std::vector<double>> minmax_normalize(const std::vector<std::vector<double>>& curves) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& curve : curves) {
        for (double x : curve) {
            if (!std::isfinite(x)) throw DomainError("minmax_normalize input contains non-finite values");
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    if (!(hi > lo)) throw DomainError("minmax_normalize needs at least two distinct values");
    const double range = hi - lo;
    std::vector<std::vector<double>> out(curves.size());
    for (std::size_t c = 0; c < curves.size(); ++c) {
        out[c].reserve(curves[c].size());
        for (double x : curves[c]) out[c].push_back(x == hi ? 1.0 : (x - lo) / range);
    }
    return out;
}

SampleMatrix generate_samples(const RbmParams& params, std::size_t count, std::size_t steps, const RngStream& rng) {
    if (count == 0) throw DomainError("sample count must be >= 1");
    if (steps == 0) throw DomainError("sampler needs at least one Gibbs step");
    params.validate();
    std::vector<ChainState> chains(count);
    std::vector<RngStream> streams;
    streams.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        streams.push_back(rng.child(s));
        chains[s].visible.resize(static_cast<Eigen::Index>(params.visible()));
        for (Eigen::Index i = 0; i < chains[s].visible.size(); ++i) chains[s].visible[i] = streams[s].normal();
    }
    kernels::gibbs_chains(params, chains, streams, steps, Backend::openmp);
    return chain_visibles(chains);
}

}  // namespace gbrbm
