#include "nilm/signatures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace nilm {

Segmentation segment_series(const PowerSeries& series, std::span<const DetectedEvent> events) {
    const Index n = series.size();
    Segmentation seg;
    auto add_steady = [&](Index from, Index to) {
        seg.periods.push_back({PeriodKind::steady, from, to, range_mean(series, from, to), 0});
    };
    Index cursor = 0;
    for (std::size_t k = 0; k < events.size(); ++k) {
        const auto& ev = events[k];
        if (ev.start > ev.end || ev.end >= n) {
            throw std::invalid_argument("segment_series: event span outside the series");
        }
        if (ev.start < cursor) {
            throw std::invalid_argument("segment_series: events overlap or are out of order");
        }
        if (ev.start > cursor) {
            add_steady(cursor, ev.start - 1);
        }
        seg.periods.push_back({PeriodKind::transient, ev.start, ev.end, 0.0, k});
        cursor = ev.end + 1;
    }
    if (cursor < n) {
        add_steady(cursor, n - 1);
    }
    return seg;
}

KeyPoints locate_keypoints(const PowerSeries& series, const DetectedEvent& event, double pre_mean,
                           double post_mean, double p_thre) {
    return locate_keypoints(series, event.start, event.end, pre_mean, post_mean, p_thre);
}

Extraction extract_signatures(const PowerSeries& series, const Segmentation& seg,
                              std::span<const DetectedEvent> events) {
    const double f = series.rate();
    Extraction out;
    out.transitions.reserve(events.size());
    for (const auto& ev : events) {
        const Index spike = ev.spike.value_or(ev.end);
        RawTransition t;
        t.dts = series[spike] - ev.pre_mean;
        t.trs = static_cast<double>(spike - ev.start) / f;
        t.dsp = ev.post_mean - ev.pre_mean;
        t.tdt = static_cast<double>(ev.end - ev.start) / f;
        t.degenerate = ev.degenerate;
        out.transitions.push_back(t);
    }
    const auto& p = seg.periods;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].kind != PeriodKind::steady) {
            continue;
        }
        Index samples = p[i].to - p[i].from + 1;
        if (i > 0 && i + 1 < p.size()) {
            ++samples;  // bounded by keypoints on both sides
        }
        out.steadies.push_back({p[i].mean, static_cast<double>(samples) / f});
    }
    return out;
}

GaussianParam fit_gaussian(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("fit_gaussian: no values");
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / n), values.size()};
}

std::string_view to_string(WaveForm f) noexcept {
    return f == WaveForm::R ? "R" : "D";
}

std::optional<WaveForm> parse_waveform(std::string_view s) noexcept {
    if (s == "R") {
        return WaveForm::R;
    }
    if (s == "D") {
        return WaveForm::D;
    }
    return std::nullopt;
}

WaveForm classify_waveshape(const GaussianParam& alpha, const GaussianParam& beta, double p_thre) {
    return std::abs(alpha.mean) > std::abs(beta.mean) + p_thre ? WaveForm::D : WaveForm::R;
}

std::vector<int> cluster_steady_states(std::span<const double> means, double merge_tol) {
    if (means.empty()) {
        throw std::invalid_argument("cluster_steady_states: no means");
    }
    if (!(merge_tol > 0.0)) {
        throw std::invalid_argument("cluster_steady_states: merge_tol must be positive");
    }
    std::vector<std::size_t> order(means.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return means[a] < means[b]; });
    std::vector<int> labels(means.size(), 0);
    int state = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0 && means[order[k]] - means[order[k - 1]] > merge_tol) {
            ++state;
        }
        labels[order[k]] = state;
    }
    return labels;
}

std::vector<SignatureSet> build_signature_sets(const PowerSeries& series,
                                               std::span<const DetectedEvent> events,
                                               const SignatureOptions& options) {
    const Segmentation seg = segment_series(series, events);
    const Extraction ex = extract_signatures(series, seg, events);

    std::vector<double> steady_means;
    for (const auto& s : ex.steadies) {
        steady_means.push_back(s.ssp);
    }
    if (steady_means.empty()) {
        return {};
    }
    const auto states =
        cluster_steady_states(steady_means, options.merge_tol.value_or(2.0 * options.p_thre));

    struct Pool {
        std::vector<double> a, g, b, d, m, t;
    };
    std::map<TransitionLabel, Pool> pools;

    // Walk the periods, remembering the steady index on each side of a transient.
    const auto& p = seg.periods;
    std::size_t steady_idx = 0;
    std::optional<std::size_t> prev_steady;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].kind == PeriodKind::steady) {
            prev_steady = steady_idx++;
            continue;
        }
        const bool next_is_steady = i + 1 < p.size() && p[i + 1].kind == PeriodKind::steady;
        if (!prev_steady || !next_is_steady) {
            prev_steady.reset();
            continue;
        }
        const std::size_t next_steady = steady_idx;
        const TransitionLabel label{states[*prev_steady], states[next_steady]};
        const auto& tr = ex.transitions[p[i].event];
        auto& pool = pools[label];
        pool.a.push_back(tr.dts);
        pool.g.push_back(tr.trs);
        pool.b.push_back(tr.dsp);
        pool.d.push_back(tr.tdt);
        pool.m.push_back(ex.steadies[next_steady].ssp);
        pool.t.push_back(ex.steadies[next_steady].std);
        prev_steady.reset();
    }

    std::vector<SignatureSet> sets;
    for (const auto& [label, pool] : pools) {
        SignatureSet s;
        s.label = label;
        s.alpha = fit_gaussian(pool.a);
        s.gamma = fit_gaussian(pool.g);
        s.beta = fit_gaussian(pool.b);
        s.delta = fit_gaussian(pool.d);
        s.mu = fit_gaussian(pool.m);
        s.tau = fit_gaussian(pool.t);
        s.form = classify_waveshape(s.alpha, s.beta, options.p_thre);
        sets.push_back(s);
    }
    return sets;
}

}  // namespace nilm
