#include <benchmark/benchmark.h>

#include "glycast/eval.hpp"
#include "glycast/features.hpp"
#include "glycast/onboard.hpp"
#include "glycast/simulator.hpp"
#include "glycast/sisal.hpp"

using namespace glycast;

namespace {

PatientRecord demo_record(int days) {
    PatientParams params;
    Scenario sc;
    sc.days = days;
    return simulate_patient(params, sc, 42, "bench");
}

} // namespace

static void BM_SimulatePatient(benchmark::State& state) {
    PatientParams params;
    Scenario sc;
    sc.days = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_patient(params, sc, 7, "p"));
    }
}
BENCHMARK(BM_SimulatePatient)->Arg(14)->Unit(benchmark::kMillisecond);

static void BM_OnboardTransform(benchmark::State& state) {
    const auto record = demo_record(14);
    const auto* bolus = record.events(VariableId::insulin_bolus);
    const GridSpec grid{record.span_start, 300,
                        static_cast<std::size_t>(
                            (record.span_end - record.span_start) / 300)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(onboard(*bolus, Kernel::insulin_default(), grid));
    }
}
BENCHMARK(BM_OnboardTransform)->Unit(benchmark::kMicrosecond);

static void BM_AlignEmbed(benchmark::State& state) {
    const auto record = demo_record(14);
    std::map<VariableId, int> lags{{VariableId::glucose, 72}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_supervised(
            record, 300, FeatureMode::univariate_glucose, {}, lags, 3, 1800));
    }
}
BENCHMARK(BM_AlignEmbed)->Unit(benchmark::kMillisecond);

static void BM_SisalStep(benchmark::State& state) {
    const auto record = demo_record(14);
    std::map<VariableId, int> lags{{VariableId::glucose, 24},
                                   {VariableId::heart_rate, 8}};
    const auto set = build_supervised(record, 300, FeatureMode::multivariate,
                                      {}, lags, 3, 1800);
    SelectionConfig cfg;
    cfg.max_rows = 1000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(resampled_weights(set, set.columns, cfg));
    }
}
BENCHMARK(BM_SisalStep)->Unit(benchmark::kMillisecond);

static void BM_WalkForwardPersistence(benchmark::State& state) {
    const auto record = demo_record(14);
    EvalConfig cfg;
    cfg.models = {ForecasterSpec::parse("persistence")};
    for (auto _ : state) {
        benchmark::DoNotOptimize(walk_forward(
            record, cfg.models[0], 300, 6, 15, cfg));
    }
}
BENCHMARK(BM_WalkForwardPersistence)->Unit(benchmark::kMillisecond);
