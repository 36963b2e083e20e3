#include "nilm/wamma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "nilm/keypoints.hpp"

namespace nilm::wamma {

namespace {

// Block-mean changes at or below this share of the threshold are ignored
// when counting direction reversals.
constexpr double kBlockSignificance = 0.5;

struct SignCensus {
    std::size_t count = 0;
    std::size_t positive = 0;
    std::size_t negative = 0;
    double pos_abs = 0.0;
    double neg_abs = 0.0;
};

SignCensus census(const PowerSeries& series, Index from, Index to) {
    SignCensus c;
    for (Index i = from; i <= to; ++i) {
        const double d = series[i] - series[i - 1];
        ++c.count;
        if (d > 0.0) {
            ++c.positive;
            c.pos_abs += d;
        } else if (d < 0.0) {
            ++c.negative;
            c.neg_abs -= d;
        }
    }
    return c;
}

int trend_of(const SignCensus& c, double majority) {
    if (c.count == 0) return 0;
    const double n = static_cast<double>(c.count);
    const double total = c.pos_abs + c.neg_abs;
    const double opposing_limit = (1.0 - majority) * total;
    if (static_cast<double>(c.positive) / n > majority && c.neg_abs < opposing_limit) return 1;
    if (static_cast<double>(c.negative) / n > majority && c.pos_abs < opposing_limit) return -1;
    return 0;
}

// Trend over d[from..to]; an empty range has no trend.
int trend_over(const PowerSeries& series, Index from, Index to, double majority) {
    if (from == 0 || from > to) return 0;
    return trend_of(census(series, from, to), majority);
}

bool plateau_steady(const PowerSeries& series, Index from, Index to, const DetectorConfig& cfg,
                    double thre) {
    const double mean = range_mean(series, from, to);
    for (Index i = from; i <= to; ++i) {
        if (std::abs(series[i] - mean) > thre) return false;
    }
    return trend_over(series, from + 1, to, cfg.trend_majority) == 0;
}

// Pooled sample std of the two margins around their own means.
double margin_noise(const PowerSeries& series, const WindowState& st) {
    double ss = 0.0;
    std::size_t dof = 0;
    for (auto [a, b] : {std::pair{st.left_l, st.left_r}, std::pair{st.right_l, st.right_r}}) {
        if (b <= a) continue;
        const double mean = range_mean(series, a, b);
        for (Index i = a; i <= b; ++i) ss += (series[i] - mean) * (series[i] - mean);
        dof += b - a;
    }
    return dof == 0 ? 0.0 : std::sqrt(ss / static_cast<double>(dof));
}

}  // namespace

Index DetectorConfig::margin_samples(double rate) const {
    return static_cast<Index>(std::max(0.0, std::round(r_m * rate)));
}

Index DetectorConfig::window_samples(double rate) const {
    return static_cast<Index>(std::max(0.0, std::round(r_w * rate)));
}

void DetectorConfig::validate(double rate) const {
    if (!(rate > 0.0)) throw std::invalid_argument("wamma: rate must be positive");
    const Index nm = margin_samples(rate);
    const Index nw = window_samples(rate);
    if (nm < 2) throw std::invalid_argument("wamma: margin must span at least 2 samples (r_m * rate)");
    if (nw < 2 * nm) throw std::invalid_argument("wamma: window must be at least twice the margin");
    if (!(p_thre_init > 0.0)) throw std::invalid_argument("wamma: p_thre_init must be positive");
    if (!(trend_majority > 0.5 && trend_majority < 1.0)) {
        throw std::invalid_argument("wamma: trend_majority must lie in (0.5, 1)");
    }
    if (!(std_factor >= 0.0)) throw std::invalid_argument("wamma: std_factor must be non-negative");
    if (!(drift_sigmas > 0.0)) throw std::invalid_argument("wamma: drift_sigmas must be positive");
    if (macro_attempt_limit < 0) throw std::invalid_argument("wamma: macro_attempt_limit must be >= 0");
}

WindowState initial_window(Index left_l, double rate, const DetectorConfig& cfg,
                           double p_thre_current) {
    const Index nm = cfg.margin_samples(rate);
    const Index nw = cfg.window_samples(rate);
    WindowState st;
    st.left_l = left_l;
    st.left_r = left_l + nm - 1;
    st.right_r = left_l + nw - 1;
    st.right_l = st.right_r - nm + 1;
    st.p_thre_current = p_thre_current;
    return st;
}

WindowMeasurements window_measurements(const PowerSeries& series, const WindowState& st) {
    if (!(st.left_l <= st.left_r && st.left_r < st.right_l && st.right_l <= st.right_r) ||
        st.right_r >= series.size()) {
        throw std::out_of_range("window_measurements: border lines out of range");
    }
    WindowMeasurements m;
    m.dp_left = std::abs(series[st.left_r] - series[st.left_l]);
    m.dp_right = std::abs(series[st.right_r] - series[st.right_l]);
    m.mean_left = range_mean(series, st.left_l, st.left_r);
    m.mean_right = range_mean(series, st.right_l, st.right_r);
    m.dp = m.mean_right - m.mean_left;
    return m;
}

MarginSteadiness margins_steady(const WindowMeasurements& m, double p_thre_current) {
    return {m.dp_left <= p_thre_current, m.dp_right <= p_thre_current};
}

TrendFractions trend_fraction(std::span<const SampleDelta> deltas) {
    if (deltas.empty()) throw std::out_of_range("trend_fraction: empty delta list");
    std::size_t neg = 0;
    std::size_t pos = 0;
    for (const auto& d : deltas) {
        neg += d.sign < 0;
        pos += d.sign > 0;
    }
    const double n = static_cast<double>(deltas.size());
    return {static_cast<double>(neg) / n, static_cast<double>(pos) / n};
}

int directional_trend(std::span<const SampleDelta> deltas, double majority) {
    SignCensus c;
    for (const auto& d : deltas) {
        ++c.count;
        if (d.d > 0.0) {
            ++c.positive;
            c.pos_abs += d.d;
        } else if (d.d < 0.0) {
            ++c.negative;
            c.neg_abs -= d.d;
        }
    }
    return trend_of(c, majority);
}

std::optional<WindowState> adjust_margins(const PowerSeries& series, const WindowState& state,
                                          const DetectorConfig& cfg) {
    // Validates the borders.
    (void)window_measurements(series, state);

    WindowState st = state;
    const double thre = st.p_thre_current;

    while (st.left_r > st.left_l) {
        const bool steady = std::abs(series[st.left_r] - series[st.left_l]) <= thre;
        if (steady && trend_over(series, st.left_l + 1, st.left_r, cfg.trend_majority) == 0) break;
        --st.left_r;
    }

    // Below-threshold drift against the transition (settling after a spike,
    // slow steady-state drift) does not hold the right margin back.
    const int direction = sign_of(window_measurements(series, st).dp);
    const Index n = series.size();
    for (;;) {
        const bool steady = std::abs(series[st.right_r] - series[st.right_l]) <= thre;
        const int trend = trend_over(series, st.right_l, st.right_r, cfg.trend_majority);
        if (steady && (trend == 0 || (direction != 0 && trend != direction))) break;
        if (st.right_r + 1 >= n) return std::nullopt;
        ++st.right_l;
        ++st.right_r;
    }
    return st;
}

CusumCheck cusum_event_check(const PowerSeries& series, const WindowState& state,
                             const DetectorConfig& cfg, Index from, Index to) {
    if (from < 1 || from > to || to >= series.size()) {
        throw std::out_of_range("cusum_event_check: need 1 <= from <= to < length");
    }
    const double thre = state.p_thre_current;
    double s = 0.0;
    std::optional<Index> crossing;
    int direction = 0;
    for (Index i = from; i <= to && !crossing; ++i) {
        s += series[i] - series[i - 1];
        if (std::abs(s) > thre) {
            crossing = i;
            direction = sign_of(s);
        }
    }
    if (!crossing) return {};

    // Long ranges need an abrupt change (sample census around the crossing)
    // that does not oscillate (margin-wide block means over the whole range).
    // Short ranges use a sample census over every delta.
    const auto one_sided = [&](double pos_abs, double neg_abs) {
        const double opposing = direction > 0 ? neg_abs : pos_abs;
        return opposing < (1.0 - cfg.trend_majority) * (pos_abs + neg_abs);
    };
    const Index block = cfg.margin_samples(series.rate());
    if (block < 2 || to - from + 2 < 3 * block) {
        const SignCensus c = census(series, from, to);
        return one_sided(c.pos_abs, c.neg_abs) ? CusumCheck{true, crossing} : CusumCheck{};
    }
    const Index c = *crossing;
    const SignCensus local = census(series, std::max(from, c + 1 - std::min(c, block)),
                                    std::min(to, c + block - 1));
    if (!one_sided(local.pos_abs, local.neg_abs)) return {};

    // A transient spike reverses direction once; oscillation keeps reversing.
    int last = 0;
    int reversals = 0;
    double prev = range_mean(series, from - 1, from - 2 + block);
    for (Index b = from - 1 + block; b + block - 1 <= to; b += block) {
        const double cur = range_mean(series, b, b + block - 1);
        const double d = cur - prev;
        prev = cur;
        if (std::abs(d) <= kBlockSignificance * thre) continue;
        const int sign = sign_of(d);
        if (last != 0 && sign != last) ++reversals;
        last = sign;
    }
    return reversals <= 1 ? CusumCheck{true, crossing} : CusumCheck{};
}

WindowState macro_screen(const PowerSeries& series, const WindowState& state,
                         const DetectorConfig& cfg) {
    const WindowMeasurements m = window_measurements(series, state);
    const int direction = sign_of(m.dp);
    if (direction == 0) return state;

    const Index nm = state.right_r - state.right_l + 1;
    const Index n = series.size();
    const double thre = state.p_thre_current;
    const double noise = margin_noise(series, state);
    WindowState st = state;
    for (int attempt = 0; attempt < cfg.macro_attempt_limit; ++attempt) {
        const Index probe_from = st.right_r + 1;
        const Index probe_to = st.right_r + nm;
        if (probe_to >= n) break;
        const bool trending =
            trend_over(series, probe_from, probe_to, cfg.trend_majority) == direction;
        const bool ranging = std::abs(series[probe_to] - series[st.right_r]) > thre;
        const double drift = direction * (range_mean(series, probe_from, probe_to) -
                                          range_mean(series, st.right_l, st.right_r));
        const bool drifting = drift > cfg.drift_sigmas * noise * std::sqrt(2.0 / static_cast<double>(nm));
        if (!trending && !ranging && !drifting) break;

        WindowState moved = st;
        moved.right_l = probe_from;
        moved.right_r = probe_to;
        const auto settled = adjust_margins(series, moved, cfg);
        if (!settled) break;
        st = *settled;
    }
    return st;
}

std::vector<SampleSpan> micro_screen(const PowerSeries& series, Index window_from,
                                     Index window_to, const DetectorConfig& cfg,
                                     double p_thre_current) {
    if (window_from > window_to || window_to >= series.size()) {
        throw std::out_of_range("micro_screen: window out of range");
    }
    const Index nm = cfg.margin_samples(series.rate());
    if (nm < 2 || window_to - window_from + 1 < nm) return {};

    WindowState probe;
    probe.p_thre_current = p_thre_current;

    std::vector<SampleSpan> runs;
    bool in_run = false;
    for (Index j = window_from; j + nm - 1 <= window_to; ++j) {
        const bool fires = cusum_event_check(series, probe, cfg, j + 1, j + nm - 1).event_pending;
        if (fires && !in_run) {
            runs.push_back({j, j});
            in_run = true;
        } else if (fires) {
            runs.back().to = j;
        } else {
            in_run = false;
        }
    }

    // Convert runs of sub-window positions into sample spans, merging runs
    // that are not separated by a steady plateau.
    std::vector<SampleSpan> spans;
    for (const auto& run : runs) {
        const SampleSpan span{run.from, run.to + nm - 1};
        if (!spans.empty()) {
            const Index gap_from = spans.back().to;
            const Index gap_to = span.from;
            if (gap_from > gap_to ||
                !plateau_steady(series, gap_from, gap_to, cfg, p_thre_current)) {
                spans.back().to = span.to;
                continue;
            }
        }
        spans.push_back(span);
    }
    return spans;
}

WindowState update_threshold(const WindowState& state, const DetectorConfig& cfg,
                             double window_std) {
    if (!(window_std >= 0.0)) {
        throw std::invalid_argument("update_threshold: standard deviation must be non-negative");
    }
    WindowState st = state;
    st.p_thre_current = std::max(cfg.p_thre_init, cfg.std_factor * window_std);
    return st;
}

namespace {

// Splits the inter-margin span into one event per suspicious change zone.
std::vector<DetectedEvent> split_events(const PowerSeries& series, const WindowState& st,
                                        const WindowMeasurements& m, const DetectorConfig& cfg,
                                        bool extended_by_macro) {
    const double thre = st.p_thre_current;
    std::vector<SampleSpan> zones = micro_screen(series, st.left_r, st.right_l, cfg, thre);

    // Plateaus between consecutive zones; events whose level change does not
    // clear the threshold are folded into their neighbour.
    for (;;) {
        if (zones.size() < 2) break;
        std::vector<double> levels{m.mean_left};
        for (std::size_t z = 0; z + 1 < zones.size(); ++z) {
            levels.push_back(range_mean(series, zones[z].to, zones[z + 1].from));
        }
        levels.push_back(m.mean_right);

        std::size_t weak = zones.size();
        for (std::size_t z = 0; z < zones.size(); ++z) {
            if (std::abs(levels[z + 1] - levels[z]) <= thre) {
                weak = z;
                break;
            }
        }
        if (weak == zones.size()) break;
        const std::size_t left = weak > 0 ? weak - 1 : 0;
        zones[left].to = zones[left + 1].to;
        zones.erase(zones.begin() + static_cast<std::ptrdiff_t>(left + 1));
    }

    if (zones.size() < 2) {
        const Provenance p = extended_by_macro ? Provenance::macro : Provenance::main;
        return {make_event(series, st.left_r, st.right_l, m.mean_left, m.mean_right, thre, p)};
    }

    std::vector<DetectedEvent> events;
    std::vector<Index> span_from;
    double pre = m.mean_left;
    for (std::size_t z = 0; z < zones.size(); ++z) {
        const bool last = z + 1 == zones.size();
        const Index from = z == 0 ? st.left_r : zones[z - 1].to;
        const Index to = last ? st.right_l : zones[z + 1].from;
        const double post = last ? m.mean_right : range_mean(series, zones[z].to, zones[z + 1].from);
        DetectedEvent ev = make_event(series, from, to, pre, post, thre, Provenance::micro);
        if (!events.empty() && ev.start <= events.back().end) {
            // Overlapping keypoints: extend the earlier event instead.
            events.back() = make_event(series, span_from.back(), to, events.back().pre_mean, post,
                                       thre, Provenance::micro);
        } else {
            events.push_back(ev);
            span_from.push_back(from);
        }
        pre = post;
    }
    if (events.size() == 1) {
        events.front().provenance = extended_by_macro ? Provenance::macro : Provenance::main;
    }
    return events;
}

}  // namespace

DetectionResult Detector::run(const PowerSeries& series) const {
    DetectionResult out;
    const double rate = series.rate();
    cfg_.validate(rate);
    const Index nm = cfg_.margin_samples(rate);
    const Index nw = cfg_.window_samples(rate);
    const Index n = series.size();
    double thre = cfg_.p_thre_init;
    out.final_threshold = thre;

    if (n < nw) {
        out.diagnostics.push_back("series shorter than one window (" + std::to_string(n) + " < " +
                                  std::to_string(nw) + " samples); nothing detected");
        return out;
    }

    RunningStats stats;
    Index accumulated_end = 0;
    Index covered_to = 0;
    Index left_l = 0;

    while (n - left_l >= 2 * nm + 1) {
        WindowState st = initial_window(left_l, rate, cfg_, thre);
        const bool truncated = st.right_r >= n;
        if (truncated) {
            st.right_r = n - 1;
            st.right_l = st.right_r - nm + 1;
        }

        const CusumCheck check = cusum_event_check(series, st, cfg_, st.left_l + 1, st.right_r);
        if (check.event_pending) {
            const auto adjusted = adjust_margins(series, st, cfg_);
            if (!adjusted) {
                out.diagnostics.push_back("transition at sample " + std::to_string(*check.crossing) +
                                          " runs past the end of the series; tail discarded");
                covered_to = n - 1;
                break;
            }
            WindowState settled = macro_screen(series, *adjusted, cfg_);
            const bool extended = settled.right_r != adjusted->right_r;
            const WindowMeasurements m = window_measurements(series, settled);
            if (std::abs(m.dp) > thre) {
                for (auto& ev : split_events(series, settled, m, cfg_, extended)) {
                    out.events.push_back(ev);
                    out.thresholds.push_back(thre);
                }
                left_l = settled.right_r;
                covered_to = settled.right_r;
                stats.clear();
                accumulated_end = left_l;
                continue;
            }
        }

        for (Index i = std::max(accumulated_end, st.left_l); i <= st.right_r; ++i) {
            stats.push(series[i]);
        }
        accumulated_end = st.right_r + 1;
        covered_to = st.right_r;
        thre = update_threshold(st, cfg_, stats.stddev()).p_thre_current;

        if (truncated) break;
        left_l += nw - nm;
    }

    if (covered_to + 1 < n) {
        out.diagnostics.push_back("last " + std::to_string(n - 1 - covered_to) +
                                  " samples shorter than two margins; not examined");
    }
    out.final_threshold = thre;
    return out;
}

std::vector<DetectedEvent> detect_events(const PowerSeries& series, const DetectorConfig& cfg) {
    return Detector(cfg).run(series).events;
}

}  // namespace nilm::wamma
