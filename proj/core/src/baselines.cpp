#include "nilm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nilm/keypoints.hpp"

namespace nilm::baselines {
namespace {

Index samples_of(double seconds, double rate) {
    return static_cast<Index>(std::llround(seconds * rate));
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be positive");
    }
}

// Prefix sums make every window mean O(1).
class Prefix {
public:
    explicit Prefix(const PowerSeries& s) : sums_(s.size() + 1, 0.0) {
        for (Index i = 0; i < s.size(); ++i) {
            sums_[i + 1] = sums_[i] + s[i];
        }
    }
    // Mean of [from, to], inclusive.
    [[nodiscard]] double mean(Index from, Index to) const {
        return (sums_[to + 1] - sums_[from]) / static_cast<double>(to - from + 1);
    }

private:
    std::vector<double> sums_;
};

}  // namespace

void validate(const StepChangeConfig& cfg, double rate) {
    require_positive(cfg.r, "r");
    require_positive(cfg.p_thre, "p_thre");
    if (samples_of(cfg.r, rate) < 1) {
        throw std::invalid_argument("r is shorter than one sample");
    }
}

void validate(const WmConfig& cfg, double rate) {
    require_positive(cfg.r_d, "r_d");
    require_positive(cfg.r_f, "r_f");
    require_positive(cfg.r_m, "r_m");
    require_positive(cfg.p_thre, "p_thre");
    if (!(cfg.r_m < cfg.r_d)) {
        throw std::invalid_argument("r_m must be smaller than r_d");
    }
    const Index nm = samples_of(cfg.r_m, rate);
    const Index nd = samples_of(cfg.r_d, rate);
    if (nm < 1 || nd < 2 * nm + 1) {
        throw std::invalid_argument("primary window too short for two margins at this rate");
    }
}

void validate(const CusumConfig& cfg, double rate) {
    require_positive(cfg.r, "r");
    require_positive(cfg.p_thre, "p_thre");
    if (samples_of(cfg.r, rate) < 1) {
        throw std::invalid_argument("r is shorter than one sample");
    }
}

std::vector<DetectedEvent> step_change_detect(const PowerSeries& series,
                                              const StepChangeConfig& cfg) {
    validate(cfg, series.rate());
    const Index n = series.size();
    const Index w = samples_of(cfg.r, series.rate());
    std::vector<DetectedEvent> events;
    if (n < 2 * w) {
        return events;
    }
    const Prefix prefix(series);
    // delta(i): mean of [i, i+w-1] minus mean of [i-w, i-1], for i in [w, n-w].
    auto delta = [&](Index i) { return prefix.mean(i, i + w - 1) - prefix.mean(i - w, i - 1); };

    auto emit = [&](Index peak) {
        const double pre = prefix.mean(peak - w, peak - 1);
        const double post = prefix.mean(peak, peak + w - 1);
        events.push_back(make_event(series, peak - w, peak + w - 1, pre, post, cfg.p_thre,
                                    Provenance::main));
    };
    // One event per chunk of at most 2w flagged positions.
    auto flush = [&](Index from, Index to) {
        const Index chunk = 2 * w;
        for (Index a = from; a <= to; a += chunk) {
            const Index b = std::min(to, a + chunk - 1);
            Index peak = a;
            for (Index i = a + 1; i <= b; ++i) {
                if (std::abs(delta(i)) > std::abs(delta(peak))) {
                    peak = i;
                }
            }
            emit(peak);
        }
    };

    bool in_run = false;
    Index run_from = 0;
    int run_sign = 0;
    for (Index i = w; i <= n - w; ++i) {
        const double d = delta(i);
        const bool flagged = std::abs(d) > cfg.p_thre;
        if (in_run && (!flagged || sign_of(d) != run_sign)) {
            flush(run_from, i - 1);
            in_run = false;
        }
        if (flagged && !in_run) {
            in_run = true;
            run_from = i;
            run_sign = sign_of(d);
        }
    }
    if (in_run) {
        flush(run_from, n - w);
    }
    return events;
}

std::vector<DetectedEvent> wm_fixed_detect(const PowerSeries& series, const WmConfig& cfg) {
    validate(cfg, series.rate());
    const Index n = series.size();
    const Index nd = samples_of(cfg.r_d, series.rate());
    const Index nm = samples_of(cfg.r_m, series.rate());
    const Index nf = samples_of(cfg.r_f, series.rate());
    std::vector<DetectedEvent> events;
    if (n < nd) {
        return events;
    }
    const Prefix prefix(series);

    Index i = 0;
    while (i + nd <= n) {
        const Index left_r = i + nm - 1;
        const Index right_l = i + nd - nm;
        const Index right_r = i + nd - 1;
        const double mu_l = prefix.mean(i, left_r);
        const double mu_r = prefix.mean(right_l, right_r);
        if (std::abs(mu_r - mu_l) <= cfg.p_thre) {
            ++i;
            continue;
        }
        // The secondary window extends the flagged span past the right margin;
        // the post level is read from its last margin-width of samples.
        const Index span_to = std::min(n - 1, right_r + nf);
        const Index post_from = span_to + 1 >= left_r + 1 + nm ? span_to + 1 - nm : left_r + 1;
        const double post = prefix.mean(post_from, span_to);
        events.push_back(
            make_event(series, left_r, span_to, mu_l, post, cfg.p_thre, Provenance::main));
        i = span_to;
    }
    return events;
}

std::vector<DetectedEvent> cusum_detect(const PowerSeries& series, const CusumConfig& cfg) {
    validate(cfg, series.rate());
    const Index n = series.size();
    const Index w = samples_of(cfg.r, series.rate());
    std::vector<DetectedEvent> events;
    if (n < w + 1) {
        return events;
    }
    const Prefix prefix(series);

    Index ref_from = 0;  // reference window restarts here after each detection
    double g_pos = 0.0;
    double g_neg = 0.0;
    for (Index i = 0; i < n; ++i) {
        if (i < ref_from + w) {
            continue;
        }
        const double ref = prefix.mean(i - w, i - 1);
        const double dev = series[i] - ref;
        g_pos = std::max(0.0, g_pos + dev);
        g_neg = std::max(0.0, g_neg - dev);
        if (g_pos > cfg.p_thre || g_neg > cfg.p_thre) {
            const Index from = i >= w ? i - w : 0;
            const Index to = std::min(n - 1, i + w - 1);
            const double post = prefix.mean(i, to);
            events.push_back(make_event(series, from, to, ref, post, cfg.p_thre,
                                        Provenance::main));
            g_pos = 0.0;
            g_neg = 0.0;
            ref_from = i;
        }
    }
    return events;
}

}  // namespace nilm::baselines
