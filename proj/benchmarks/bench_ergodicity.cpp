#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "cbo/batching.hpp"
#include "cbo/consensus.hpp"
#include "cbo/ergodicity.hpp"
#include "cbo/rng.hpp"

namespace {

Eigen::MatrixXd random_row_stochastic(cbo::RngStream& rng, int n) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            a(i, j) = rng.uniform(0.0, 1.0);
            total += a(i, j);
        }
        a.row(i) /= total;
    }
    return a;
}

void BM_ergodicity_coefficient(benchmark::State& state) {
    cbo::RngStream rng(1, 0);
    const auto a = random_row_stochastic(rng, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cbo::ergodicity_coefficient(a));
    }
}
BENCHMARK(BM_ergodicity_coefficient)->Arg(8)->Arg(32)->Arg(100);

void BM_sample_partition(benchmark::State& state) {
    cbo::RngStream rng(2, 0);
    const int particles = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto partition = cbo::sample_partition(particles, 10, rng);
        benchmark::DoNotOptimize(partition.batch_index.data());
    }
    state.SetItemsProcessed(state.iterations() * particles);
}
BENCHMARK(BM_sample_partition)->Arg(100)->Arg(1000);

void BM_gibbs_weights(benchmark::State& state) {
    cbo::RngStream rng(3, 0);
    std::vector<double> values(static_cast<std::size_t>(state.range(0)));
    for (double& v : values) v = rng.uniform(0.0, 50.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cbo::gibbs_weights(values, 30.0));
    }
}
BENCHMARK(BM_gibbs_weights)->Arg(10)->Arg(100);

} // namespace
