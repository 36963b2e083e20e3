#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "fixtures.hpp"
#include "nilm/reconstruction.hpp"
#include "nilm/signatures.hpp"
#include "nilm/wamma.hpp"
#include "oracles.hpp"

using namespace nilm;

namespace {

// 0 W, rise to 1200 W over 10 samples, decay to 1000 W over 10 samples.
std::vector<double> spike_waveform(Index lead, Index tail) {
    std::vector<double> v(lead, 0.0);
    for (int k = 1; k <= 10; ++k) v.push_back(120.0 * k);
    for (int k = 1; k <= 10; ++k) v.push_back(1200.0 - 20.0 * k);
    v.insert(v.end(), tail, 1000.0);
    return v;
}

std::vector<double> kettle_cycles(std::size_t cycles, std::uint64_t seed, double rate) {
    auto set = fixtures::kettle_set();
    set.tau = fixtures::g(40.0, 4.0);
    Rng rng(seed);
    CycleOptions opt;
    opt.idle_before = 20.0;
    opt.idle_after = 0.0;
    std::vector<double> v;
    for (std::size_t k = 0; k < cycles; ++k) {
        const auto c = reconstruct_cycle(set, nullptr, rate, rng, opt);
        v.insert(v.end(), c.samples.begin(), c.samples.end());
    }
    v.insert(v.end(), static_cast<std::size_t>(20 * rate), 0.0);
    return v;
}

}  // namespace

TEST(SegmentSeries, NoEvents) {
    const PowerSeries s(fixtures::constant(50, 100.0), 20.0);
    const auto seg = segment_series(s, {});
    ASSERT_EQ(seg.periods.size(), 1u);
    EXPECT_EQ(seg.periods[0].kind, PeriodKind::steady);
    EXPECT_EQ(seg.periods[0].from, 0u);
    EXPECT_EQ(seg.periods[0].to, 49u);
    EXPECT_DOUBLE_EQ(seg.periods[0].mean, 100.0);
}

TEST(SegmentSeries, OneEvent) {
    const PowerSeries s(fixtures::steps(100, 0.0, {50}, {1000.0}), 20.0);
    DetectedEvent e;
    e.start = 49;
    e.end = 50;
    const auto seg = segment_series(s, std::vector{e});
    ASSERT_EQ(seg.periods.size(), 3u);
    EXPECT_EQ(seg.periods[0].to, 48u);
    EXPECT_EQ(seg.periods[1].kind, PeriodKind::transient);
    EXPECT_EQ(seg.periods[1].from, 49u);
    EXPECT_EQ(seg.periods[1].to, 50u);
    EXPECT_EQ(seg.periods[2].from, 51u);
    EXPECT_EQ(seg.periods[2].to, 99u);
    EXPECT_DOUBLE_EQ(seg.periods[2].mean, 1000.0);
}

TEST(SegmentSeries, OverlapRejected) {
    const PowerSeries s(fixtures::constant(100, 0.0), 20.0);
    DetectedEvent a;
    a.start = 10;
    a.end = 30;
    DetectedEvent b;
    b.start = 25;
    b.end = 40;
    EXPECT_THROW((void)segment_series(s, std::vector{a, b}), std::invalid_argument);
}

TEST(SegmentSeries, KettleCycleTiling) {
    const double rate = 20.0;
    const auto v = kettle_cycles(1, 3, rate);
    const PowerSeries s(v, rate);
    wamma::DetectorConfig cfg;
    const auto events = wamma::detect_events(s, cfg);
    ASSERT_EQ(events.size(), 2u);
    const auto seg = segment_series(s, events);
    std::size_t steady = 0;
    std::size_t transient = 0;
    Index covered = 0;
    for (std::size_t k = 0; k < seg.periods.size(); ++k) {
        const auto& p = seg.periods[k];
        EXPECT_EQ(p.from, covered);
        covered = p.to + 1;
        (p.kind == PeriodKind::steady ? steady : transient) += 1;
        if (k > 0) EXPECT_NE(p.kind, seg.periods[k - 1].kind);
    }
    EXPECT_EQ(covered, s.size());
    EXPECT_EQ(transient, 2u);
    EXPECT_EQ(steady, 3u);
}

TEST(Keypoints, RampAndDecay) {
    const auto v = spike_waveform(40, 40);
    const PowerSeries s(v, 20.0);
    const auto ev = make_event(s, 30, 70, 0.0, 1000.0, 15.0, Provenance::main);
    const auto kp = locate_keypoints(s, ev, 0.0, 1000.0, 15.0);
    EXPECT_EQ(kp.start.index, 39u);
    EXPECT_EQ(kp.spike.index, 49u);
    EXPECT_DOUBLE_EQ(kp.spike.value, 1200.0);
    EXPECT_EQ(kp.end.index, 59u);
}

TEST(Keypoints, MonotoneRiseSpikeIsEnd) {
    std::vector<double> v(30, 0.0);
    for (int k = 1; k <= 5; ++k) v.push_back(200.0 * k);
    v.insert(v.end(), 30, 1000.0);
    const PowerSeries s(v, 20.0);
    const auto ev = make_event(s, 20, 50, 0.0, 1000.0, 15.0, Provenance::main);
    ASSERT_TRUE(ev.spike.has_value());
    EXPECT_EQ(*ev.spike, ev.end);
}

TEST(ExtractSignatures, PureStep) {
    const PowerSeries s(fixtures::steps(100, 0.0, {50}, {1000.0}), 20.0);
    const auto ev = make_event(s, 40, 60, 0.0, 1000.0, 15.0, Provenance::main);
    const std::vector events{ev};
    const auto ex = extract_signatures(s, segment_series(s, events), events);
    ASSERT_EQ(ex.transitions.size(), 1u);
    EXPECT_DOUBLE_EQ(ex.transitions[0].dts, 1000.0);
    EXPECT_DOUBLE_EQ(ex.transitions[0].dsp, 1000.0);
    EXPECT_DOUBLE_EQ(ex.transitions[0].trs, 0.05);
    EXPECT_DOUBLE_EQ(ex.transitions[0].tdt, 0.05);
    ASSERT_EQ(ex.steadies.size(), 2u);
    EXPECT_DOUBLE_EQ(ex.steadies[1].ssp, 1000.0);
}

TEST(ExtractSignatures, RampAndDecay) {
    const PowerSeries s(spike_waveform(40, 40), 20.0);
    const auto ev = make_event(s, 30, 70, 0.0, 1000.0, 15.0, Provenance::main);
    const std::vector events{ev};
    const auto ex = extract_signatures(s, segment_series(s, events), events);
    ASSERT_EQ(ex.transitions.size(), 1u);
    const auto& t = ex.transitions[0];
    EXPECT_DOUBLE_EQ(t.dts, 1200.0);
    EXPECT_DOUBLE_EQ(t.trs, 0.5);
    EXPECT_DOUBLE_EQ(t.dsp, 1000.0);
    EXPECT_DOUBLE_EQ(t.tdt, 1.0);
    EXPECT_FALSE(t.degenerate);
}

TEST(ExtractSignatures, KettleDtsScatter) {
    const double rate = 20.0;
    const PowerSeries s(kettle_cycles(30, 8, rate), rate);
    const auto events = wamma::detect_events(s, wamma::DetectorConfig{});
    const auto ex = extract_signatures(s, segment_series(s, events), events);
    std::vector<double> dts;
    for (const auto& t : ex.transitions) {
        EXPECT_GE(t.tdt, t.trs);
        EXPECT_GE(t.trs, 0.0);
        if (t.dsp > 0) dts.push_back(t.dts);
    }
    ASSERT_EQ(dts.size(), 30u);
    const auto [m, sd] = oracles::mean_std(dts);
    EXPECT_NEAR(m, 1139.0, 3.0 * 9.8 / std::sqrt(30.0));
    EXPECT_NEAR(sd, 9.8, 4.0);
}

TEST(FitGaussian, Examples) {
    const std::vector<double> one{5.0};
    EXPECT_EQ(fit_gaussian(one), (GaussianParam{5.0, 0.0, 1}));
    const std::vector<double> two{0.0, 20.0};
    EXPECT_EQ(fit_gaussian(two), (GaussianParam{10.0, 10.0, 2}));
    EXPECT_THROW((void)fit_gaussian(std::vector<double>{}), std::invalid_argument);

    Rng rng(514);
    std::normal_distribution<double> n(514.0, 43.2);
    std::vector<double> draws(50);
    for (double& x : draws) x = n(rng);
    const auto g = fit_gaussian(draws);
    EXPECT_EQ(g.n, 50u);
    EXPECT_NEAR(g.mean, 514.0, 3.0 * 43.2 / std::sqrt(50.0));
}

TEST(ClassifyWaveshape, Examples) {
    EXPECT_EQ(classify_waveshape(fixtures::g(1139, 9.8), fixtures::g(1138, 10.1), 15), WaveForm::R);
    EXPECT_EQ(classify_waveshape(fixtures::g(2339, 71), fixtures::g(1101, 64), 15), WaveForm::D);
    EXPECT_EQ(classify_waveshape(fixtures::g(500, 1), fixtures::g(500, 1), 15), WaveForm::R);
    EXPECT_EQ(classify_waveshape(fixtures::g(-2339, 71), fixtures::g(-1101, 64), 15), WaveForm::D);
    EXPECT_EQ(parse_waveform(to_string(WaveForm::D)), WaveForm::D);
    EXPECT_FALSE(parse_waveform("Q").has_value());
}

TEST(ClusterSteadyStates, Examples) {
    const std::vector<double> a{999, 1001, 1500};
    EXPECT_EQ(cluster_steady_states(a, 50), (std::vector<int>{0, 0, 1}));
    const std::vector<double> b{7, 7, 7};
    EXPECT_EQ(cluster_steady_states(b, 50), (std::vector<int>{0, 0, 0}));
    const std::vector<double> c{1500, 2, 1003, 0};
    EXPECT_EQ(cluster_steady_states(c, 50), (std::vector<int>{2, 0, 1, 0}));
}

TEST(BuildSignatureSets, KettleHasTwoStates) {
    const double rate = 20.0;
    const PowerSeries s(kettle_cycles(3, 21, rate), rate);
    const auto events = wamma::detect_events(s, wamma::DetectorConfig{});
    ASSERT_EQ(events.size(), 6u);
    const auto sets = build_signature_sets(s, events);
    ASSERT_EQ(sets.size(), 2u);
    EXPECT_EQ(sets[0].label, (TransitionLabel{0, 1}));
    EXPECT_EQ(sets[1].label, (TransitionLabel{1, 0}));
    EXPECT_EQ(sets[0].form, WaveForm::R);
    EXPECT_EQ(sets[0].alpha.n, 3u);
    EXPECT_NEAR(sets[0].mu.mean, 1027.0, 3 * 5.2);
    for (const auto& set : sets) {
        EXPECT_GE(set.delta.mean, set.gamma.mean);
    }
}
