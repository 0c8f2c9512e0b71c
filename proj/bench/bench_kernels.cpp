// Times the serial reference kernels against the OpenMP kernels.
//
//   bench_kernels [visible] [hidden] [batch] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include "gbrbm/kernels.hpp"
#include "gbrbm/model.hpp"

using namespace gbrbm;

namespace {

double seconds(const std::function<void()>& fn, int repeats) {
    fn();
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / repeats;
}

RbmParams random_params(std::size_t m, std::size_t n, RngStream& rng) {
    RbmParams p(ModelDims{m, n});
    for (Eigen::Index i = 0; i < p.weights.size(); ++i) p.weights.data()[i] = 0.05 * rng.normal();
    for (Eigen::Index i = 0; i < p.vbias.size(); ++i) p.vbias[i] = 0.1 * rng.normal();
    for (Eigen::Index i = 0; i < p.hbias.size(); ++i) p.hbias[i] = 0.1 * rng.normal();
    return p;
}

void report(const char* name, double ref, double omp) {
    std::printf("%-22s %12.6f %12.6f %8.2fx\n", name, ref * 1e3, omp * 1e3, ref / omp);
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t m = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 784;
    const std::size_t n = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 200;
    const std::size_t batch = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 200;
    const int repeats = argc > 4 ? std::atoi(argv[4]) : 5;

    RngStream rng(7, 0);
    const RbmParams params = random_params(m, n, rng);
    SampleMatrix v(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();

    std::printf("m=%zu n=%zu N_B=%zu threads=%d\n", m, n, batch, omp_get_max_threads());
    std::printf("%-22s %12s %12s %9s\n", "kernel", "ref [ms]", "omp [ms]", "speedup");

    const auto positive = [&](Backend b) { return [&, b] { kernels::mean_positive_stats(params, v, true, b); }; };
    report("mean_positive_stats", seconds(positive(Backend::reference), repeats),
           seconds(positive(Backend::openmp), repeats));

    const auto gibbs = [&](Backend b) {
        return [&, b] {
            std::vector<ChainState> chains(batch);
            std::vector<RngStream> streams;
            for (std::size_t i = 0; i < batch; ++i) {
                chains[i].visible = v.row(static_cast<Eigen::Index>(i)).transpose();
                streams.emplace_back(11, i);
            }
            kernels::gibbs_chains(params, chains, streams, 5, b);
        };
    };
    report("gibbs_chains (K=5)", seconds(gibbs(Backend::reference), repeats), seconds(gibbs(Backend::openmp), repeats));

    const std::size_t small_n = std::min<std::size_t>(n, 14);
    RngStream small_rng(9, 0);
    const RbmParams small = random_params(std::min<std::size_t>(m, 64), small_n, small_rng);
    const auto expectation = [&](Backend b) { return [&, b] { kernels::model_expectation(small, true, b); }; };
    report("model_expectation", seconds(expectation(Backend::reference), repeats),
           seconds(expectation(Backend::openmp), repeats));

    std::vector<double> betas(200);
    for (std::size_t k = 0; k < betas.size(); ++k) betas[k] = static_cast<double>(k) / (betas.size() - 1);
    const auto ais = [&](Backend b) { return [&, b] { kernels::ais_log_weights(small, betas, 64, RngStream(3, 0), b); }; };
    report("ais_log_weights", seconds(ais(Backend::reference), repeats), seconds(ais(Backend::openmp), repeats));
    return 0;
}
