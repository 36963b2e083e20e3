#include "nilm/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "nilm/baselines.hpp"
#include "nilm/wamma.hpp"

namespace nilm {

std::vector<TimeSpan> event_spans(const PowerSeries& series, std::span<const DetectedEvent> events) {
    std::vector<TimeSpan> out;
    out.reserve(events.size());
    for (const auto& ev : events) {
        out.push_back({series.time_of(ev.start), series.time_of(ev.end)});
    }
    return out;
}

MatchCounts match_events(std::span<const TimeSpan> detected,
                         std::span<const GroundTruthEvent> truth, double tolerance) {
    if (!(tolerance >= 0.0)) {
        throw std::invalid_argument("match_events: negative tolerance");
    }
    std::vector<bool> used(truth.size(), false);
    MatchCounts c;
    c.ed = static_cast<std::int64_t>(detected.size());
    c.eg = static_cast<std::int64_t>(truth.size());

    for (const auto& d : detected) {
        const double lo = d.start - tolerance;
        const double hi = d.end + tolerance;
        // First truth that can fall inside the padded span.
        auto it = std::lower_bound(truth.begin(), truth.end(), lo,
                                   [](const GroundTruthEvent& g, double t) { return g.time < t; });
        std::size_t best = truth.size();
        double best_dist = std::numeric_limits<double>::infinity();
        for (auto j = static_cast<std::size_t>(it - truth.begin());
             j < truth.size() && truth[j].time <= hi; ++j) {
            if (used[j]) {
                continue;
            }
            const double t = truth[j].time;
            const double dist = t < d.start ? d.start - t : (t > d.end ? t - d.end : 0.0);
            if (dist < best_dist) {
                best_dist = dist;
                best = j;
            }
        }
        if (best < truth.size()) {
            used[best] = true;
            ++c.tp;
        } else {
            ++c.fp;
        }
    }
    c.fn = c.eg - c.tp;
    return c;
}

std::int64_t percent_tenths(std::int64_t num, std::int64_t den) {
    if (den <= 0 || num < 0) {
        throw std::invalid_argument("percent_tenths: bad fraction");
    }
    // round(1000 * num / den), halves rounded up.
    return (2000 * num + den) / (2 * den);
}

std::string format_tenths(std::int64_t tenths) {
    const std::int64_t mag = tenths < 0 ? -tenths : tenths;
    std::string s = std::to_string(mag / 10) + "." + std::to_string(mag % 10);
    return tenths < 0 ? "-" + s : s;
}

MatchReport compute_metrics(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t ed,
                            std::int64_t eg) {
    if (tp < 0 || fp < 0 || fn < 0) {
        throw std::invalid_argument("compute_metrics: negative count");
    }
    if (tp + fp != ed || tp + fn != eg) {
        throw std::invalid_argument("compute_metrics: inconsistent counts");
    }
    if (eg < 1) {
        throw std::invalid_argument("compute_metrics: no ground-truth events");
    }
    MatchReport r;
    r.counts = {tp, fp, fn, ed, eg};
    const auto d = [](std::int64_t v) { return static_cast<double>(v); };
    r.tpp = d(tp) / d(eg);
    r.fnp = d(fn) / d(eg);
    r.fpp = ed > 0 ? d(fp) / d(ed) : 0.0;
    const std::int64_t f1_den = 2 * tp + fp + fn;  // eg >= 1 keeps this positive
    r.f1 = d(2 * tp) / d(f1_den);
    r.tpp_tenths = percent_tenths(tp, eg);
    r.fnp_tenths = percent_tenths(fn, eg);
    r.fpp_tenths = ed > 0 ? percent_tenths(fp, ed) : 0;
    r.f1_tenths = percent_tenths(2 * tp, f1_den);
    return r;
}

MatchReport compute_metrics(const MatchCounts& c) {
    return compute_metrics(c.tp, c.fp, c.fn, c.ed, c.eg);
}

namespace {

std::size_t row_count(const GridRow& r) {
    return static_cast<std::size_t>(std::floor((r.max - r.min) / r.increment + 1e-9)) + 1;
}

double grid_value(const GridRow& r, std::size_t k) {
    const double v = r.min + static_cast<double>(k) * r.increment;
    return std::round(v * 1e9) / 1e9;
}

}  // namespace

void ParameterGrid::validate() const {
    if (rows.empty()) {
        throw std::invalid_argument("parameter grid is empty");
    }
    for (const auto& r : rows) {
        if (r.name.empty()) {
            throw std::invalid_argument("parameter grid row without a name");
        }
        if (!std::isfinite(r.min) || !std::isfinite(r.max) || !(r.increment > 0.0) ||
            !std::isfinite(r.increment)) {
            throw std::invalid_argument("parameter '" + r.name + "': bad increment or bounds");
        }
        if (r.min > r.max) {
            throw std::invalid_argument("parameter '" + r.name + "': min exceeds max");
        }
    }
}

std::size_t ParameterGrid::size() const {
    validate();
    std::size_t n = 1;
    for (const auto& r : rows) {
        n *= row_count(r);
    }
    return n;
}

ParameterSet Combination::as_set() const {
    ParameterSet s;
    for (const auto& [k, v] : values) {
        s[k] = v;
    }
    return s;
}

std::vector<Combination> enumerate_grid(const ParameterGrid& grid) {
    const std::size_t total = grid.size();
    std::vector<std::size_t> counts;
    for (const auto& r : grid.rows) {
        counts.push_back(row_count(r));
    }
    std::vector<Combination> out;
    out.reserve(total);
    std::vector<std::size_t> digit(grid.rows.size(), 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        Combination c;
        c.index = idx + 1;
        for (std::size_t j = 0; j < grid.rows.size(); ++j) {
            c.values.emplace_back(grid.rows[j].name, grid_value(grid.rows[j], digit[j]));
        }
        out.push_back(std::move(c));
        // Mixed-radix increment, last row fastest.
        for (std::size_t j = grid.rows.size(); j-- > 0;) {
            if (++digit[j] < counts[j]) {
                break;
            }
            digit[j] = 0;
        }
    }
    return out;
}

namespace {

const std::map<std::string, std::vector<std::string>, std::less<>>& detector_table() {
    static const std::map<std::string, std::vector<std::string>, std::less<>> table{
        {"wamma", {"r_m", "r_w", "p_thre"}},
        {"step", {"r", "p_thre"}},
        {"wm", {"r_d", "r_f", "r_m", "p_thre"}},
        {"cusum", {"r", "p_thre"}},
    };
    return table;
}

double pick(const ParameterSet& p, std::string_view name, double fallback) {
    const auto it = p.find(name);
    return it == p.end() ? fallback : it->second;
}

}  // namespace

bool is_known_detector(std::string_view name) {
    return detector_table().contains(name);
}

std::vector<std::string> detector_parameters(std::string_view name) {
    const auto it = detector_table().find(name);
    if (it == detector_table().end()) {
        throw std::invalid_argument("unknown detector '" + std::string(name) + "'");
    }
    return it->second;
}

std::vector<DetectedEvent> run_detector(std::string_view name, const PowerSeries& series,
                                        const ParameterSet& params) {
    const auto allowed = detector_parameters(name);
    for (const auto& [k, v] : params) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            throw std::invalid_argument("detector '" + std::string(name) +
                                        "' has no parameter '" + k + "'");
        }
    }
    if (name == "wamma") {
        wamma::DetectorConfig cfg;
        cfg.r_m = pick(params, "r_m", cfg.r_m);
        cfg.r_w = pick(params, "r_w", cfg.r_w);
        cfg.p_thre_init = pick(params, "p_thre", cfg.p_thre_init);
        return wamma::detect_events(series, cfg);
    }
    if (name == "step") {
        baselines::StepChangeConfig cfg;
        cfg.r = pick(params, "r", cfg.r);
        cfg.p_thre = pick(params, "p_thre", cfg.p_thre);
        return baselines::step_change_detect(series, cfg);
    }
    if (name == "wm") {
        baselines::WmConfig cfg;
        cfg.r_d = pick(params, "r_d", cfg.r_d);
        cfg.r_f = pick(params, "r_f", cfg.r_f);
        cfg.r_m = pick(params, "r_m", cfg.r_m);
        cfg.p_thre = pick(params, "p_thre", cfg.p_thre);
        return baselines::wm_fixed_detect(series, cfg);
    }
    baselines::CusumConfig cfg;
    cfg.r = pick(params, "r", cfg.r);
    cfg.p_thre = pick(params, "p_thre", cfg.p_thre);
    return baselines::cusum_detect(series, cfg);
}

SweepResult sweep(const PowerSeries& series, std::span<const GroundTruthEvent> truth,
                  std::string_view detector, const ParameterGrid& grid,
                  const SweepOptions& options) {
    const auto allowed = detector_parameters(detector);
    for (const auto& r : grid.rows) {
        if (std::find(allowed.begin(), allowed.end(), r.name) == allowed.end()) {
            throw std::invalid_argument("detector '" + std::string(detector) +
                                        "' has no parameter '" + r.name + "'");
        }
    }
    const auto combos = enumerate_grid(grid);
    SweepResult result;
    result.rows.resize(combos.size());

    auto run_one = [&](std::size_t k) {
        const auto events = run_detector(detector, series, combos[k].as_set());
        const auto spans = event_spans(series, events);
        result.rows[k] = {combos[k], compute_metrics(match_events(spans, truth, options.tolerance))};
    };

    const unsigned threads =
        std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(combos.size())));
    if (threads == 1) {
        for (std::size_t k = 0; k < combos.size(); ++k) {
            run_one(k);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < combos.size(); k = next++) {
                    try {
                        run_one(k);
                    } catch (...) {
                        if (!failed.exchange(true)) {
                            failure = std::current_exception();
                        }
                        return;
                    }
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    // Exact f1 comparison: 2tp / (2tp + fp + fn) as cross-multiplied rationals.
    for (std::size_t k = 1; k < result.rows.size(); ++k) {
        const auto& a = result.rows[k].report.counts;
        const auto& b = result.rows[result.best].report.counts;
        const std::int64_t an = 2 * a.tp, ad = 2 * a.tp + a.fp + a.fn;
        const std::int64_t bn = 2 * b.tp, bd = 2 * b.tp + b.fp + b.fn;
        if (an * bd > bn * ad) {
            result.best = k;
        }
    }
    return result;
}

}  // namespace nilm
