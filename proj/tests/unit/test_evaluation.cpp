#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <stdexcept>

#include "fixtures.hpp"
#include "nilm/evaluation.hpp"
#include "nilm/wamma.hpp"
#include "oracles.hpp"

using namespace nilm;

namespace {

std::vector<GroundTruthEvent> truth_at(std::initializer_list<double> times) {
    std::vector<GroundTruthEvent> out;
    for (double t : times) out.push_back({t, ""});
    return out;
}

// Exhaustive maximum one-to-one matching size for tiny cases.
std::int64_t best_matching(const std::vector<TimeSpan>& d, const std::vector<GroundTruthEvent>& t,
                           double tol, std::size_t i = 0, std::vector<bool> used = {}) {
    if (used.empty()) used.assign(t.size(), false);
    if (i == d.size()) return 0;
    std::int64_t best = best_matching(d, t, tol, i + 1, used);
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (used[j] || t[j].time < d[i].start - tol || t[j].time > d[i].end + tol) continue;
        used[j] = true;
        best = std::max(best, 1 + best_matching(d, t, tol, i + 1, used));
        used[j] = false;
    }
    return best;
}

}  // namespace

TEST(MatchEvents, WithinTolerance) {
    const std::vector<TimeSpan> d{{10.02, 10.10}};
    const auto c = match_events(d, truth_at({10.0}), 1.0);
    EXPECT_EQ(c.tp, 1);
    EXPECT_EQ(c.fp, 0);
    EXPECT_EQ(c.fn, 0);
}

TEST(MatchEvents, NothingDetected) {
    const auto c = match_events({}, truth_at({1, 2, 3, 4, 5}), 1.0);
    EXPECT_EQ(c.fn, 5);
    EXPECT_EQ(c.tp, 0);
    EXPECT_EQ(c.fp, 0);
    EXPECT_EQ(c.eg, 5);
    EXPECT_EQ(c.ed, 0);
}

TEST(MatchEvents, OneToOne) {
    const std::vector<TimeSpan> d{{9.8, 9.9}, {10.1, 10.2}};
    const auto t = truth_at({10.0});
    const auto c = match_events(d, t, 1.0);
    EXPECT_EQ(c.tp, 1);
    EXPECT_EQ(c.fp, 1);
    EXPECT_EQ(c.fn, 0);
    EXPECT_EQ(c.tp, best_matching(d, t, 1.0));
}

TEST(MatchEvents, NegativeToleranceRejected) {
    EXPECT_THROW((void)match_events({}, {}, -0.1), std::invalid_argument);
}

TEST(MatchEvents, ShiftInvariant) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::vector<double> dt(20);
    std::vector<double> tt(15);
    for (double& x : dt) x = u(rng);
    for (double& x : tt) x = u(rng);
    std::sort(dt.begin(), dt.end());
    std::sort(tt.begin(), tt.end());
    auto build = [&](double shift) {
        std::vector<TimeSpan> d;
        for (double x : dt) d.push_back({x + shift, x + shift + 0.2});
        std::vector<GroundTruthEvent> t;
        for (double x : tt) t.push_back({x + shift, ""});
        return match_events(d, t, 1.0);
    };
    EXPECT_EQ(build(0.0), build(1234.5));
}

TEST(MatchEvents, GreedyAgreesWithExhaustiveOnSmallCases) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> dt(4);
        std::vector<double> tt(4);
        for (double& x : dt) x = u(rng);
        for (double& x : tt) x = u(rng);
        std::sort(dt.begin(), dt.end());
        std::sort(tt.begin(), tt.end());
        std::vector<TimeSpan> d;
        for (double x : dt) d.push_back({x, x + 0.1});
        const auto t = [&] {
            std::vector<GroundTruthEvent> v;
            for (double x : tt) v.push_back({x, ""});
            return v;
        }();
        const auto c = match_events(d, t, 0.5);
        EXPECT_LE(c.tp, best_matching(d, t, 0.5));
        EXPECT_EQ(c.tp + c.fp, c.ed);
        EXPECT_EQ(c.tp + c.fn, c.eg);
    }
}

TEST(PercentTenths, MatchesOracle) {
    for (std::int64_t den = 1; den < 140; ++den) {
        for (std::int64_t num = 0; num <= den; ++num) {
            ASSERT_EQ(percent_tenths(num, den), oracles::percent_tenths(num, den)) << num << "/" << den;
        }
    }
    EXPECT_EQ(format_tenths(992), "99.2");
    EXPECT_EQ(format_tenths(8), "0.8");
    EXPECT_EQ(format_tenths(1000), "100.0");
    EXPECT_THROW((void)percent_tenths(1, 0), std::invalid_argument);
}

TEST(ComputeMetrics, ReferenceRows) {
    EXPECT_EQ(compute_metrics(16, 0, 2, 16, 18).f1_tenths, 941);
    EXPECT_EQ(compute_metrics(17, 0, 1, 17, 18).f1_tenths, 971);
    EXPECT_EQ(compute_metrics(1, 0, 17, 1, 18).f1_tenths, 105);
    const auto r = compute_metrics(120, 1, 1, 121, 121);
    EXPECT_EQ(r.tpp_tenths, 992);
    EXPECT_EQ(r.fpp_tenths, 8);
    EXPECT_EQ(r.fnp_tenths, 8);
    EXPECT_EQ(r.f1_tenths, 992);
    EXPECT_DOUBLE_EQ(r.f1, 120.0 / 121.0);
}

TEST(ComputeMetrics, EdgeCases) {
    const auto none = compute_metrics(0, 0, 5, 0, 5);
    EXPECT_EQ(none.fpp, 0.0);
    EXPECT_EQ(none.f1, 0.0);
    EXPECT_EQ(compute_metrics(3, 0, 0, 3, 3).f1, 1.0);
    EXPECT_LT(compute_metrics(3, 1, 0, 4, 3).f1, 1.0);
    EXPECT_THROW((void)compute_metrics(1, 1, 1, 3, 2), std::invalid_argument);
    EXPECT_THROW((void)compute_metrics(0, 1, 0, 1, 0), std::invalid_argument);
}

TEST(EnumerateGrid, CusumGridOrder) {
    const ParameterGrid g{{{"r", 0.5, 1.0, 0.5}, {"p_thre", 100, 200, 100}}};
    const auto combos = enumerate_grid(g);
    ASSERT_EQ(combos.size(), 4u);
    const double want[4][2] = {{0.5, 100}, {0.5, 200}, {1, 100}, {1, 200}};
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(combos[k].index, k + 1);
        EXPECT_EQ(combos[k].values[0].second, want[k][0]);
        EXPECT_EQ(combos[k].values[1].second, want[k][1]);
    }
}

TEST(EnumerateGrid, SizesAndErrors) {
    EXPECT_EQ(enumerate_grid(ParameterGrid{{{"r", 1, 1, 0.5}}}).size(), 1u);
    const ParameterGrid g{{{"r_m", 0.1, 0.5, 0.2}, {"r_w", 2, 3, 0.5}, {"p_thre", 20, 30, 5}}};
    EXPECT_EQ(g.size(), 27u);
    const auto combos = enumerate_grid(g);
    ASSERT_EQ(combos.size(), 27u);
    EXPECT_DOUBLE_EQ(combos[2].values[0].second, 0.1);
    EXPECT_DOUBLE_EQ(combos.back().values[0].second, 0.5);
    EXPECT_THROW((void)enumerate_grid(ParameterGrid{}), std::invalid_argument);
    EXPECT_THROW((void)enumerate_grid(ParameterGrid{{{"r", 1, 0, 0.5}}}), std::invalid_argument);
    EXPECT_THROW((void)enumerate_grid(ParameterGrid{{{"r", 0, 1, 0}}}), std::invalid_argument);
}

TEST(RunDetector, NamesAndParameters) {
    EXPECT_TRUE(is_known_detector("wamma"));
    EXPECT_FALSE(is_known_detector("glr"));
    const PowerSeries s(fixtures::steps(400, 0.0, {200}, {1000.0}), 20.0);
    for (const char* name : {"wamma", "step", "wm", "cusum"}) {
        const auto ev = run_detector(name, s, {});
        ASSERT_EQ(ev.size(), 1u) << name;
        EXPECT_EQ(ev[0].start, 199u);
    }
    EXPECT_THROW((void)run_detector("glr", s, {}), std::invalid_argument);
    EXPECT_THROW((void)run_detector("wamma", s, {{"r_x", 1.0}}), std::invalid_argument);
}

TEST(Sweep, SingleCombinationEqualsDirectRun) {
    auto v = fixtures::steps(2400, 100.0, {400, 1200, 2000}, {500.0, -300.0, 700.0});
    fixtures::add_noise(v, 3.0, 9);
    const PowerSeries s(v, 20.0);
    const std::vector<GroundTruthEvent> truth{{20.0, ""}, {60.0, ""}, {100.0, ""}};
    const ParameterGrid g{{{"r_m", 0.2, 0.2, 0.1}, {"r_w", 2, 2, 1}, {"p_thre", 15, 15, 5}}};
    const auto res = sweep(s, truth, "wamma", g);
    ASSERT_EQ(res.rows.size(), 1u);
    wamma::DetectorConfig cfg;
    const auto ev = wamma::detect_events(s, cfg);
    const auto spans = event_spans(s, ev);
    EXPECT_EQ(res.rows[0].report.counts, match_events(spans, truth, 1.0));
}

TEST(Sweep, OrderAndThreadsAgree) {
    const PowerSeries s(fixtures::square_wave(600, 500.0, 200.0, 0.25, 20.0), 20.0);
    std::vector<GroundTruthEvent> truth;
    for (double t = 2.0; t < 30.0; t += 2.0) truth.push_back({t, ""});
    const ParameterGrid g{{{"r", 0.5, 1.0, 0.5}, {"p_thre", 100, 200, 100}}};
    const auto a = sweep(s, truth, "cusum", g);
    SweepOptions opt;
    opt.threads = 3;
    const auto b = sweep(s, truth, "cusum", g, opt);
    ASSERT_EQ(a.rows.size(), 4u);
    ASSERT_EQ(b.rows.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(a.rows[k].combination.index, k + 1);
        EXPECT_EQ(a.rows[k].report.counts, b.rows[k].report.counts);
    }
    EXPECT_EQ(a.best, b.best);
    for (const auto& row : a.rows) {
        EXPECT_LE(row.report.f1, a.rows[a.best].report.f1);
    }
    EXPECT_THROW((void)sweep(s, truth, "cusum", ParameterGrid{{{"r_w", 1, 1, 1}}}),
                 std::invalid_argument);
}
