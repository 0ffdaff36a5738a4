#include <benchmark/benchmark.h>

#include "cbo/dynamics.hpp"

namespace {

cbo::RunConfig bench_config(int particles, int dimension, int batch_size) {
    cbo::RunConfig config;
    config.particles = particles;
    config.dimension = dimension;
    config.batch_size = batch_size;
    config.objective = cbo::make_objective("rastrigin", dimension, {1.0}, 0.0);
    config.rule = cbo::RepresentativeRule::argmin();
    config.scheme = cbo::SchemeConfig::generalized(0.01, cbo::NoiseModel::gaussian(0.5));
    config.max_steps = 1;
    config.tolerance = 1e-300;
    return config;
}

void BM_step(benchmark::State& state) {
    const int particles = static_cast<int>(state.range(0));
    const int batch_size = static_cast<int>(state.range(1));
    const int dimension = 10;
    auto objective = cbo::make_objective("rastrigin", dimension, {1.0}, 0.0);
    cbo::RngStream rng(1, 0);
    auto ensemble = cbo::sample_initial(particles, dimension, -3.0, 3.0, rng);
    cbo::RowMatrixXd eta;
    cbo::NoiseModel::gaussian(0.5).sample(particles, dimension, rng, eta);
    const auto rule = cbo::RepresentativeRule::argmin();
    for (auto _ : state) {
        const auto partition = cbo::sample_partition(particles, batch_size, rng);
        auto next = cbo::step(ensemble, partition, rule, *objective, 0.01, eta);
        benchmark::DoNotOptimize(next.states.data());
    }
    state.SetItemsProcessed(state.iterations() * particles);
}
BENCHMARK(BM_step)->Args({100, 10})->Args({100, 100})->Args({1000, 10});

void BM_run_to_stop(benchmark::State& state) {
    const auto config = bench_config(100, static_cast<int>(state.range(0)), 10);
    cbo::RunConfig full = config;
    full.max_steps = 100000;
    full.tolerance = 1e-3;
    std::uint64_t replicate = 0;
    for (auto _ : state) {
        cbo::RngStream rng(42, replicate++);
        const auto result = cbo::run(full, rng);
        benchmark::DoNotOptimize(result.steps);
    }
}
BENCHMARK(BM_run_to_stop)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_noise_sample(benchmark::State& state) {
    cbo::RngStream rng(7, 0);
    cbo::RowMatrixXd eta;
    const auto noise = cbo::NoiseModel::gaussian(0.5);
    for (auto _ : state) {
        noise.sample(100, 10, rng, eta);
        benchmark::DoNotOptimize(eta.data());
    }
}
BENCHMARK(BM_noise_sample);

} // namespace

BENCHMARK_MAIN();
