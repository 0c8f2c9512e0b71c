#include "gbrbm/kernels.hpp"

#include <string>

#include "kernels_impl.hpp"

namespace gbrbm::kernels {

namespace {

void check_batch(const RbmParams& params, const SampleMatrix& v) {
    if (v.rows() == 0) throw DomainError("empty batch");
    if (static_cast<std::size_t>(v.cols()) != params.visible()) {
        throw ShapeError("batch has " + std::to_string(v.cols()) + " columns, model has " +
                         std::to_string(params.visible()) + " visible units");
    }
    if (!v.allFinite()) throw DomainError("batch contains non-finite entries");
}

void check_enumerable(const RbmParams& params) {
    if (params.hidden() > kMaxEnumHidden) {
        throw CapacityError("exact enumeration limited to " + std::to_string(kMaxEnumHidden) + " hidden units, got " +
                            std::to_string(params.hidden()));
    }
}

}  // namespace

SampleMatrix hidden_probs(const RbmParams& params, const SampleMatrix& v, Backend backend) {
    check_batch(params, v);
    return backend == Backend::reference ? reference::hidden_probs(params, v) : openmp::hidden_probs(params, v);
}

ParamGrad mean_positive_stats(const RbmParams& params, const SampleMatrix& v, bool with_logvar, Backend backend) {
    check_batch(params, v);
    return backend == Backend::reference ? reference::mean_positive_stats(params, v, with_logvar)
                                         : openmp::mean_positive_stats(params, v, with_logvar);
}

Vector mean_logvar_term(const RbmParams& params, const SampleMatrix& v, Backend backend) {
    return *mean_positive_stats(params, v, true, backend).d_logvar;
}

double hidden_log_sum(const RbmParams& params, Backend backend) {
    check_enumerable(params);
    return backend == Backend::reference ? reference::hidden_log_sum(params) : openmp::hidden_log_sum(params);
}

ParamGrad model_expectation(const RbmParams& params, bool with_logvar, Backend backend) {
    check_enumerable(params);
    params.validate();
    return backend == Backend::reference ? reference::model_expectation(params, with_logvar)
                                         : openmp::model_expectation(params, with_logvar);
}

void gibbs_chains(const RbmParams& params, std::span<ChainState> chains, std::span<RngStream> streams,
                  std::size_t k, Backend backend) {
    if (chains.size() != streams.size()) throw ShapeError("one stream per chain required");
    for (const auto& chain : chains) {
        if (static_cast<std::size_t>(chain.visible.size()) != params.visible()) {
            throw ShapeError("chain visible state does not match the model");
        }
    }
    const auto count = static_cast<std::ptrdiff_t>(chains.size());
    if (backend == Backend::reference) {
        for (std::ptrdiff_t c = 0; c < count; ++c) gibbs_advance(params, chains[c], k, streams[c]);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < count; ++c) gibbs_advance(params, chains[c], k, streams[c]);
}

std::vector<double> ais_log_weights(const RbmParams& params, std::span<const double> betas, std::size_t particles,
                                    const RngStream& base, Backend backend) {
    params.validate();
    if (betas.size() < 2) throw DomainError("annealing schedule needs at least two temperatures");
    std::vector<double> out(particles);
    const auto count = static_cast<std::ptrdiff_t>(particles);
    if (backend == Backend::reference) {
        for (std::ptrdiff_t p = 0; p < count; ++p) out[p] = ais_particle(params, betas, base.child(p));
        return out;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < count; ++p) out[p] = ais_particle(params, betas, base.child(p));
    return out;
}

}  // namespace gbrbm::kernels
