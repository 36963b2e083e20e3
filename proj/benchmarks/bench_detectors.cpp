#include <benchmark/benchmark.h>

#include <map>
#include <string>

#include "nilm/baselines.hpp"
#include "nilm/evaluation.hpp"
#include "nilm/reconstruction.hpp"
#include "nilm/signature_tree.hpp"
#include "nilm/wamma.hpp"

namespace {

nilm::GaussianParam g(double mean, double std) { return {mean, std, 1}; }

nilm::SignatureSet kettle() {
    nilm::SignatureSet s;
    s.form = nilm::WaveForm::R;
    s.alpha = g(1139, 9.8);
    s.gamma = g(0.48, 0.28);
    s.beta = g(1138, 10.1);
    s.delta = g(0.48, 0.28);
    s.mu = g(1027, 5.2);
    s.tau = g(60, 6);
    s.label = {0, 1};
    return s;
}

nilm::SignatureSet vacuum() {
    nilm::SignatureSet s;
    s.form = nilm::WaveForm::D;
    s.alpha = g(2339, 71.1);
    s.gamma = g(0.14, 0.07);
    s.beta = g(1101, 64.4);
    s.delta = g(1.14, 0.08);
    s.mu = g(1002, 34.0);
    s.tau = g(45, 5);
    s.label = {0, 1};
    return s;
}

// Roughly one cycle of each appliance every two minutes, 50 Hz.
const nilm::Scenario& scenario(double minutes) {
    static std::map<double, nilm::Scenario> cache;
    auto it = cache.find(minutes);
    if (it != cache.end()) return it->second;
    nilm::ScenarioSpec spec;
    spec.rate = 50.0;
    spec.duration = minutes * 60.0;
    spec.noise_std = 3.0;
    spec.min_gap = 10.0;
    const auto cycles = static_cast<std::size_t>(minutes / 4.0);
    spec.appliances.push_back({"kettle", kettle(), std::nullopt, {}, cycles, 0.0, 1.0});
    spec.appliances.push_back({"vacuum", vacuum(), std::nullopt, {}, cycles, 0.0, 1.0});
    return cache.emplace(minutes, nilm::synthesize_scenario(spec)).first->second;
}

void BM_Wamma(benchmark::State& state) {
    const auto& sc = scenario(static_cast<double>(state.range(0)));
    nilm::wamma::DetectorConfig cfg;
    for (auto _ : state) {
        auto ev = nilm::wamma::detect_events(sc.aggregate, cfg);
        benchmark::DoNotOptimize(ev);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * sc.aggregate.size()));
}
BENCHMARK(BM_Wamma)->Arg(10)->Arg(40)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_StepChange(benchmark::State& state) {
    const auto& sc = scenario(40);
    for (auto _ : state) {
        auto ev = nilm::baselines::step_change_detect(sc.aggregate, {1.0, 15.0});
        benchmark::DoNotOptimize(ev);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * sc.aggregate.size()));
}
BENCHMARK(BM_StepChange)->Unit(benchmark::kMillisecond);

void BM_WindowWithMargin(benchmark::State& state) {
    const auto& sc = scenario(40);
    for (auto _ : state) {
        auto ev = nilm::baselines::wm_fixed_detect(sc.aggregate, {2.0, 1.0, 0.2, 15.0});
        benchmark::DoNotOptimize(ev);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * sc.aggregate.size()));
}
BENCHMARK(BM_WindowWithMargin)->Unit(benchmark::kMillisecond);

void BM_Cusum(benchmark::State& state) {
    const auto& sc = scenario(40);
    for (auto _ : state) {
        auto ev = nilm::baselines::cusum_detect(sc.aggregate, {1.0, 100.0});
        benchmark::DoNotOptimize(ev);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * sc.aggregate.size()));
}
BENCHMARK(BM_Cusum)->Unit(benchmark::kMillisecond);

void BM_Sweep27(benchmark::State& state) {
    const auto& sc = scenario(10);
    const nilm::ParameterGrid grid{{{"r_m", 0.1, 0.5, 0.2}, {"r_w", 2, 3, 0.5}, {"p_thre", 20, 30, 5}}};
    nilm::SweepOptions opt;
    opt.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        auto res = nilm::sweep(sc.aggregate, sc.truth, "wamma", grid, opt);
        benchmark::DoNotOptimize(res);
    }
}
BENCHMARK(BM_Sweep27)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_MatchEvents(benchmark::State& state) {
    const auto& sc = scenario(160);
    const auto ev = nilm::wamma::detect_events(sc.aggregate, nilm::wamma::DetectorConfig{});
    const auto spans = nilm::event_spans(sc.aggregate, ev);
    for (auto _ : state) {
        auto c = nilm::match_events(spans, sc.truth, 1.0);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_MatchEvents);

void BM_QueryTree(benchmark::State& state) {
    nilm::SignatureTree tree;
    for (int k = 0; k < state.range(0); ++k) {
        auto set = k % 2 ? vacuum() : kettle();
        set.alpha.mean += 10.0 * k;
        tree.add("appliance" + std::to_string(k), {set});
    }
    const nilm::ObservedTransition obs{nilm::WaveForm::D, 2300.0, 0.15, 1100.0, 1.1};
    for (auto _ : state) {
        auto r = nilm::query_tree(tree, obs);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_QueryTree)->Arg(8)->Arg(64)->Arg(512);

void BM_ReconstructCycle(benchmark::State& state) {
    const auto set = vacuum();
    nilm::Rng rng(1);
    for (auto _ : state) {
        auto c = nilm::reconstruct_cycle(set, nullptr, 50.0, rng);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_ReconstructCycle);

}  // namespace

BENCHMARK_MAIN();
