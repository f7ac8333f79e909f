#include <benchmark/benchmark.h>

#include <cstddef>
#include <random>
#include <vector>

#include "fbmtv/crossings.hpp"
#include "fbmtv/fbm.hpp"
#include "fbmtv/local_time.hpp"
#include "fbmtv/path.hpp"
#include "fbmtv/variation.hpp"

namespace {

fbmtv::SamplePath make_walk(std::size_t n_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> values(n_samples);
    double level = 0.0;
    for (double& v : values) {
        v = level;
        level += normal(rng);
    }
    return fbmtv::SamplePath(0.0, 1.0, values);
}

void BM_TtvValue(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const fbmtv::SamplePath path = make_walk(n, 1);
    for (auto _ : state) {
        (void)_;
        benchmark::DoNotOptimize(fbmtv::ttv_value(path, 2.0));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}

void BM_TtvWitness(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const fbmtv::SamplePath path = make_walk(n, 2);
    for (auto _ : state) {
        (void)_;
        benchmark::DoNotOptimize(fbmtv::ttv(path, 2.0).value);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}

void BM_TautString(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const fbmtv::SamplePath path = make_walk(n, 3);
    for (auto _ : state) {
        (void)_;
        benchmark::DoNotOptimize(fbmtv::taut_string(path, 2.0).total_variation());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}

void BM_LevelCrossings(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const fbmtv::SamplePath path = make_walk(n, 4);
    const fbmtv::LevelGrid grid(2.0, 0.0);
    for (auto _ : state) {
        (void)_;
        benchmark::DoNotOptimize(fbmtv::level_crossings(path, grid).k);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}

void BM_BanachIntegral(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const fbmtv::SamplePath path = make_walk(n, 5);
    for (auto _ : state) {
        (void)_;
        benchmark::DoNotOptimize(fbmtv::banach_integral(path, 2.0, fbmtv::BanachKind::total));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}

void BM_UpcrossingFunctional(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const fbmtv::FbmSpec spec{fbmtv::HurstIndex(0.5), n, 1.0 / static_cast<double>(n), 6,
                              fbmtv::FbmMethod::circulant_embedding};
    const fbmtv::SamplePath path = fbmtv::sample_fbm(spec);
    const fbmtv::TestFunction g = fbmtv::TestFunction::indicator(-0.5, 0.5);
    for (auto _ : state) {
        (void)_;
        benchmark::DoNotOptimize(
            fbmtv::upcrossing_functional(path, 0.05, fbmtv::HurstIndex(0.5), g));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}

void BM_SampleFbm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const double h = static_cast<double>(state.range(1)) / 100.0;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        (void)_;
        const fbmtv::FbmSpec spec{fbmtv::HurstIndex(h), n, 1.0 / static_cast<double>(n),
                                  ++seed, fbmtv::FbmMethod::circulant_embedding};
        benchmark::DoNotOptimize(fbmtv::sample_fbm(spec).values().back());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}

} // namespace

BENCHMARK(BM_TtvValue)->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_TtvWitness)->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_TautString)->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_LevelCrossings)->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_BanachIntegral)->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_UpcrossingFunctional)->RangeMultiplier(8)->Range(1 << 12, 1 << 18);
BENCHMARK(BM_SampleFbm)
    ->Args({1 << 12, 25})
    ->Args({1 << 12, 50})
    ->Args({1 << 12, 75})
    ->Args({1 << 16, 50})
    ->Args({1 << 19, 50});

BENCHMARK_MAIN();
