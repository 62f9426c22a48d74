#include <benchmark/benchmark.h>

#include <cmath>

#include "glycast/models.hpp"
#include "glycast/rng.hpp"

using namespace glycast;

namespace {

SupervisedSet synthetic_set(std::size_t n, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    SupervisedSet set;
    for (std::size_t j = 0; j < p; ++j) {
        set.columns.push_back({VariableId::glucose, static_cast<int>(j + 1)});
    }
    set.X = Matrix(n, p);
    set.y.resize(n);
    set.row_times.assign(n, make_timestamp(2021, 3, 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) set.X(i, j) = rng.uniform(60.0, 250.0);
        set.y[i] = 0.6 * set.X(i, 0) + 0.2 * set.X(i, std::min<std::size_t>(1, p - 1)) +
                   rng.normal(0.0, 5.0);
    }
    return set;
}

} // namespace

static void BM_RidgeFit(benchmark::State& state) {
    const auto set = synthetic_set(state.range(0), 72, 1);
    const auto spec = ForecasterSpec::parse("ridge");
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit(spec, set));
    }
}
BENCHMARK(BM_RidgeFit)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

static void BM_ForestFit(benchmark::State& state) {
    const auto set = synthetic_set(state.range(0), 72, 2);
    ForecasterSpec spec = ForecasterSpec::parse("rf");
    spec.seed = 3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit(spec, set));
    }
}
BENCHMARK(BM_ForestFit)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

static void BM_SvrFit(benchmark::State& state) {
    const auto set = synthetic_set(state.range(0), 72, 4);
    const auto spec = ForecasterSpec::parse("svr");
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit(spec, set));
    }
}
BENCHMARK(BM_SvrFit)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

static void BM_ArimaFit(benchmark::State& state) {
    Rng rng(5);
    std::vector<double> y(state.range(0));
    double prev = 120.0;
    for (auto& v : y) {
        prev = 24.0 + 0.8 * prev + rng.normal(0.0, 3.0);
        v = prev;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_arima(y, 300, 2, 0, 1));
    }
}
BENCHMARK(BM_ArimaFit)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_ForestPredict(benchmark::State& state) {
    const auto set = synthetic_set(2000, 72, 6);
    ForecasterSpec spec = ForecasterSpec::parse("rf");
    spec.seed = 7;
    const auto model = fit(spec, set);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            model->predict_row({set.X.row(i % set.n_rows()), set.n_features()}));
        ++i;
    }
}
BENCHMARK(BM_ForestPredict);

static void BM_SvrPredict(benchmark::State& state) {
    const auto set = synthetic_set(1000, 72, 8);
    const auto model = fit(ForecasterSpec::parse("svr"), set);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            model->predict_row({set.X.row(i % set.n_rows()), set.n_features()}));
        ++i;
    }
}
BENCHMARK(BM_SvrPredict);
