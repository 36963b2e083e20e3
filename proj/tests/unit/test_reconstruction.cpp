#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "fixtures.hpp"
#include "nilm/reconstruction.hpp"
#include "oracles.hpp"

using namespace nilm;

namespace {

SignatureSet zero_std(SignatureSet s) {
    for (GaussianParam* g : {&s.alpha, &s.beta, &s.gamma, &s.delta, &s.mu, &s.tau}) g->std = 0.0;
    return s;
}

SignatureSet rectangle(double power, double seconds) {
    SignatureSet s;
    s.form = WaveForm::R;
    s.alpha = fixtures::g(power, 0);
    s.beta = fixtures::g(power, 0);
    s.gamma = fixtures::g(0.1, 0);
    s.delta = fixtures::g(0.1, 0);
    s.mu = fixtures::g(power, 0);
    s.tau = fixtures::g(seconds, 0);
    s.label = {0, 1};
    return s;
}

}  // namespace

TEST(ReconstructCycle, ZeroStdKettle) {
    const double rate = 50.0;
    const auto c = reconstruct_cycle(zero_std(fixtures::kettle_set()), rate, 1);
    ASSERT_EQ(c.transition_starts.size(), 2u);
    ASSERT_EQ(c.transition_ends.size(), 2u);
    // Transition of 0.48 s.
    EXPECT_EQ(c.transition_ends[0] - c.transition_starts[0], 24u);
    EXPECT_NEAR(c.samples[c.transition_ends[0]], 1138.0, 1e-9);
    // Steady period of 514 s whose mean is 1027 W.
    const std::vector<double> steady(c.samples.begin() + static_cast<std::ptrdiff_t>(c.transition_ends[0]) + 1,
                                     c.samples.begin() + static_cast<std::ptrdiff_t>(c.transition_starts[1]));
    EXPECT_NEAR(static_cast<double>(steady.size() + 1) / rate, 514.0, 1.0 / rate);
    EXPECT_NEAR(oracles::mean_std(steady).first, 1027.0, 0.5);
    EXPECT_EQ(c.samples.front(), 0.0);
    EXPECT_EQ(c.samples.back(), 0.0);
    // Same seed, same samples.
    EXPECT_EQ(reconstruct_cycle(zero_std(fixtures::kettle_set()), rate, 1).samples, c.samples);
}

TEST(ReconstructCycle, VacuumSpikeAndSettle) {
    const double rate = 50.0;
    const auto c = reconstruct_cycle(zero_std(fixtures::vacuum_set()), rate, 2);
    const Index s = c.transition_starts[0];
    Index peak = s;
    for (Index i = s; i <= c.transition_ends[0]; ++i) {
        if (c.samples[i] > c.samples[peak]) peak = i;
    }
    EXPECT_NEAR(c.samples[peak], 2339.0, 1e-9);
    EXPECT_EQ(peak - s, 7u);                       // 0.14 s
    EXPECT_EQ(c.transition_ends[0] - s, 57u);      // 1.14 s
    EXPECT_NEAR(c.samples[c.transition_ends[0]], 1101.0, 1e-9);
}

TEST(ReconstructCycle, Rectangle) {
    const auto c = reconstruct_cycle(rectangle(500.0, 10.0), 20.0, 3);
    for (Index i = c.transition_ends[0]; i <= c.transition_starts[1]; ++i) {
        EXPECT_DOUBLE_EQ(c.samples[i], 500.0);
    }
    EXPECT_EQ(c.truth.size(), 2u);
}

TEST(ReconstructCycle, DrawsFollowGaussians) {
    auto set = fixtures::kettle_set();
    set.tau = fixtures::g(20.0, 2.0);
    Rng rng(7);
    std::vector<double> tau;
    for (int k = 0; k < 60; ++k) {
        const auto c = reconstruct_cycle(set, nullptr, 50.0, rng);
        tau.push_back(static_cast<double>(c.transition_starts[1] - c.transition_ends[0]) / 50.0);
    }
    EXPECT_NEAR(oracles::mean_std(tau).first, 20.0, 3.0 * 2.0 / std::sqrt(60.0));
}

TEST(ReconstructCycle, ImpossibleDurationsThrow) {
    auto set = rectangle(100.0, 10.0);
    set.delta = fixtures::g(-5.0, 0.0);
    EXPECT_THROW((void)reconstruct_cycle(set, 20.0, 1), std::runtime_error);
}

TEST(SynthesizeScenario, SingleActivationIsAdditiveIdentity) {
    const auto set = zero_std(fixtures::kettle_set());
    ScenarioSpec spec;
    spec.rate = 20.0;
    spec.duration = 600.0;
    ApplianceEntry e;
    e.name = "kettle";
    e.on = set;
    e.activations = {10.0};
    spec.appliances.push_back(e);
    const auto sc = synthesize_scenario(spec);
    CycleOptions opt;
    opt.idle_before = 0.0;
    opt.idle_after = 0.0;
    const auto c = reconstruct_cycle(set, 20.0, 99, opt);
    ASSERT_EQ(sc.aggregate.size(), 12000u);
    for (Index j = 0; j < sc.aggregate.size(); ++j) {
        const double want = j >= 200 && j - 200 < c.samples.size() ? c.samples[j - 200] : 0.0;
        ASSERT_DOUBLE_EQ(sc.aggregate[j], want) << j;
    }
    ASSERT_EQ(sc.truth.size(), 2u);
    EXPECT_DOUBLE_EQ(sc.truth[0].time, 10.0);
    EXPECT_EQ(sc.truth[0].label, "kettle:0->1");
    EXPECT_EQ(sc.truth[1].label, "kettle:1->0");
}

TEST(SynthesizeScenario, NearSimultaneousActivations) {
    ScenarioSpec spec;
    spec.rate = 60.0;
    spec.duration = 60.0;
    ApplianceEntry a;
    a.name = "a";
    a.on = rectangle(500.0, 20.0);
    a.activations = {10.0};
    ApplianceEntry b = a;
    b.name = "b";
    b.activations = {10.15};
    spec.appliances = {a, b};
    const auto sc = synthesize_scenario(spec);
    ASSERT_EQ(sc.truth.size(), 4u);
    EXPECT_NEAR(sc.truth[1].time - sc.truth[0].time, 0.15, 1e-9);
}

TEST(SynthesizeScenario, CountedCyclesAndDeterminism) {
    ScenarioSpec spec;
    spec.rate = 50.0;
    spec.duration = 3600.0;
    spec.noise_std = 2.0;
    spec.seed = 77;
    const double powers[] = {60.0, 120.0, 1000.0, 1500.0, 2000.0};
    for (int k = 0; k < 5; ++k) {
        ApplianceEntry e;
        e.name = "app" + std::to_string(k);
        e.on = rectangle(powers[k], 20.0);
        e.on.tau.std = 2.0;
        e.count = 13;
        spec.appliances.push_back(e);
    }
    const auto a = synthesize_scenario(spec);
    EXPECT_EQ(a.truth.size(), 130u);
    for (std::size_t k = 1; k < a.truth.size(); ++k) EXPECT_LE(a.truth[k - 1].time, a.truth[k].time);
    const auto b = synthesize_scenario(spec);
    EXPECT_EQ(std::vector<double>(a.aggregate.samples().begin(), a.aggregate.samples().end()),
              std::vector<double>(b.aggregate.samples().begin(), b.aggregate.samples().end()));
    EXPECT_EQ(a.truth, b.truth);

    // Aggregate minus components is the white noise alone.
    std::vector<double> residual(a.aggregate.size());
    for (Index j = 0; j < residual.size(); ++j) {
        double sum = 0.0;
        for (const auto& [name, comp] : a.components) sum += comp[j];
        residual[j] = a.aggregate[j] - sum;
    }
    const auto [m, sd] = oracles::mean_std(residual);
    EXPECT_NEAR(m, 0.0, 0.05);
    EXPECT_NEAR(sd, 2.0, 0.05);
}

TEST(SynthesizeScenario, Errors) {
    ScenarioSpec spec;
    spec.rate = 20.0;
    spec.duration = 100.0;
    ApplianceEntry e;
    e.name = "a";
    e.on = rectangle(100.0, 30.0);
    e.activations = {10.0, 20.0};
    spec.appliances = {e};
    EXPECT_THROW((void)synthesize_scenario(spec), std::invalid_argument);

    spec.appliances[0].activations.clear();
    spec.appliances[0].count = 10;
    EXPECT_THROW((void)synthesize_scenario(spec), std::invalid_argument);

    spec.rate = 0.0;
    EXPECT_THROW(spec.validate(), std::invalid_argument);
}
