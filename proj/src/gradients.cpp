#include "gbrbm/gradients.hpp"

#include <algorithm>
#include <cmath>

#include "gbrbm/kernels.hpp"

namespace gbrbm {

ParamGrad ParamGrad::zeros(ModelDims dims, bool with_logvar) {
    ParamGrad g;
    g.d_weights = Matrix::Zero(static_cast<Eigen::Index>(dims.visible), static_cast<Eigen::Index>(dims.hidden));
    g.d_hbias = Vector::Zero(static_cast<Eigen::Index>(dims.hidden));
    if (with_logvar) g.d_logvar = Vector::Zero(static_cast<Eigen::Index>(dims.visible));
    return g;
}

ParamGrad& ParamGrad::operator+=(const ParamGrad& other) {
    d_weights += other.d_weights;
    d_hbias += other.d_hbias;
    if (d_logvar && other.d_logvar) *d_logvar += *other.d_logvar;
    return *this;
}

ParamGrad& ParamGrad::operator-=(const ParamGrad& other) {
    d_weights -= other.d_weights;
    d_hbias -= other.d_hbias;
    if (d_logvar && other.d_logvar) *d_logvar -= *other.d_logvar;
    return *this;
}

ParamGrad& ParamGrad::operator*=(double scale) {
    d_weights *= scale;
    d_hbias *= scale;
    if (d_logvar) *d_logvar *= scale;
    return *this;
}

double ParamGrad::max_abs() const {
    double out = std::max(d_weights.cwiseAbs().maxCoeff(), d_hbias.cwiseAbs().maxCoeff());
    if (d_logvar) out = std::max(out, d_logvar->cwiseAbs().maxCoeff());
    return out;
}

ParamGrad operator-(ParamGrad lhs, const ParamGrad& rhs) {
    lhs -= rhs;
    return lhs;
}

SampleMatrix chain_visibles(std::span<const ChainState> chains) {
    if (chains.empty()) return {};
    SampleMatrix out(static_cast<Eigen::Index>(chains.size()), chains.front().visible.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
        if (chains[c].visible.size() != out.cols()) throw ShapeError("chain visible states differ in length");
        out.row(static_cast<Eigen::Index>(c)) = chains[c].visible.transpose();
    }
    return out;
}

ParamGrad grad_g(const RbmParams& params, const SampleMatrix& batch, VarianceMode mode, Backend backend) {
    return kernels::mean_positive_stats(params, batch, mode == VarianceMode::learned, backend);
}

ParamGrad grad_f_estimate(const RbmParams& params, std::span<const ChainState> chain_ends, VarianceMode mode,
                          Backend backend) {
    if (chain_ends.empty()) throw DomainError("grad_f_estimate needs at least one chain");
    return kernels::mean_positive_stats(params, chain_visibles(chain_ends), mode == VarianceMode::learned, backend);
}

ParamGrad grad_f_exact(const RbmParams& params, VarianceMode mode, Backend backend) {
    return kernels::model_expectation(params, mode == VarianceMode::learned, backend);
}

Vector grad_logvar(const RbmParams& params, const SampleMatrix& data_batch, const SampleMatrix& model_batch) {
    if (data_batch.rows() == 0 || model_batch.rows() == 0) throw DomainError("grad_logvar needs nonempty batches");
    return kernels::mean_logvar_term(params, data_batch, Backend::openmp) -
           kernels::mean_logvar_term(params, model_batch, Backend::openmp);
}

ParamGrad numerical_gradient(const RbmParams& params, const Vector& v, double epsilon) {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) throw DomainError("finite-difference epsilon must lie in [1e-7, 1e-3]");
    if (params.hidden() > kMaxEnumHidden) throw CapacityError("numerical_gradient needs exact enumeration");

    const auto log_likelihood = [&v](const RbmParams& p) {
        return free_energy_g(p, v) - exact_log_partition(p, Backend::reference);
    };
    const auto central = [&](auto&& coordinate) {
        RbmParams shifted = params;
        double& x = coordinate(shifted);
        const double original = x;
        x = original + epsilon;
        const double up = log_likelihood(shifted);
        x = original - epsilon;
        const double down = log_likelihood(shifted);
        return (up - down) / (2.0 * epsilon);
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

}  // namespace gbrbm
