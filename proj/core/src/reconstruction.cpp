#include "nilm/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nilm {
namespace {

constexpr int redraw_limit = 100;

double draw(const GaussianParam& g, Rng& rng) {
    if (g.std == 0.0) {
        return g.mean;
    }
    std::normal_distribution<double> dist(g.mean, g.std);
    return dist(rng);
}

// Draws until the value rounds to at least `min_samples` samples.
Index draw_samples(const GaussianParam& g, double scale, double rate, Index min_samples, Rng& rng,
                   const char* what) {
    for (int k = 0; k < redraw_limit; ++k) {
        const double v = draw(g, rng) * scale;
        if (v > 1.0 / rate) {
            const auto n = static_cast<Index>(std::llround(v * rate));
            if (n >= min_samples) {
                return n;
            }
        }
    }
    throw std::runtime_error(std::string("reconstruct_cycle: could not draw a usable ") + what);
}

std::string label_text(const std::string& name, int from, int to) {
    std::string s = std::to_string(from) + "->" + std::to_string(to);
    return name.empty() ? s : name + ":" + s;
}

}  // namespace

Cycle reconstruct_cycle(const SignatureSet& on, const SignatureSet* off, double rate, Rng& rng,
                        const CycleOptions& options) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("reconstruct_cycle: rate must be positive");
    }
    if (options.idle_before < 0.0 || options.idle_after < 0.0 || !(options.tdt_scale > 0.0)) {
        throw std::invalid_argument("reconstruct_cycle: bad cycle options");
    }
    const double b = options.base;
    const auto idle_before = static_cast<Index>(std::llround(options.idle_before * rate));
    const auto idle_after = static_cast<Index>(std::llround(options.idle_after * rate));

    // On transition.
    std::vector<double> rise;  // samples s+1 .. s+K
    double alpha = 0.0;
    const double beta = draw(on.beta, rng);
    if (on.form == WaveForm::D) {
        alpha = draw(on.alpha, rng);
        const Index g = draw_samples(on.gamma, options.tdt_scale, rate, 1, rng, "TRS");
        const Index k = draw_samples(on.delta, options.tdt_scale, rate, g + 1, rng, "TDT");
        for (Index j = 1; j <= k; ++j) {
            const double v = j <= g ? alpha * static_cast<double>(j) / static_cast<double>(g)
                                    : alpha + (beta - alpha) * static_cast<double>(j - g) /
                                                  static_cast<double>(k - g);
            rise.push_back(b + v);
        }
    } else {
        const Index k = draw_samples(on.delta, options.tdt_scale, rate, 1, rng, "TDT");
        for (Index j = 1; j <= k; ++j) {
            rise.push_back(b + beta * static_cast<double>(j) / static_cast<double>(k));
        }
    }

    // Steady period: linear from a (end of rise) to e (off start) with mean mu.
    const double mu = draw(on.mu, rng);
    const Index m = draw_samples(on.tau, 1.0, rate, 2, rng, "STD");
    const double a = b + beta;
    const double e = 2.0 * (b + mu) - a;

    const Index k_off =
        draw_samples(off ? off->delta : on.delta, options.tdt_scale, rate, 1, rng, "TDT");

    Cycle c;
    c.samples.assign(idle_before + 1, b);
    const Index s = idle_before;
    c.samples.insert(c.samples.end(), rise.begin(), rise.end());
    for (Index j = 1; j < m; ++j) {
        c.samples.push_back(a + (e - a) * static_cast<double>(j) / static_cast<double>(m));
    }
    const Index o = c.samples.size();
    c.samples.push_back(e);
    for (Index j = 1; j <= k_off; ++j) {
        c.samples.push_back(e + (b - e) * static_cast<double>(j) / static_cast<double>(k_off));
    }
    c.samples.insert(c.samples.end(), idle_after, b);

    c.transition_starts = {s, o};
    c.transition_ends = {s + rise.size(), o + k_off};
    c.truth.push_back({static_cast<double>(s) / rate,
                       label_text(options.name, on.label.from, on.label.to)});
    c.truth.push_back({static_cast<double>(o) / rate,
                       label_text(options.name, on.label.to, on.label.from)});
    return c;
}

Cycle reconstruct_cycle(const SignatureSet& on, double rate, std::uint64_t seed,
                        const CycleOptions& options) {
    Rng rng(seed);
    return reconstruct_cycle(on, nullptr, rate, rng, options);
}

void ScenarioSpec::validate() const {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("scenario: rate must be positive");
    }
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw std::invalid_argument("scenario: duration must be positive");
    }
    if (noise_std < 0.0 || min_gap < 0.0) {
        throw std::invalid_argument("scenario: noise_std and min_gap must be non-negative");
    }
    for (const auto& a : appliances) {
        if (a.name.empty()) {
            throw std::invalid_argument("scenario: appliance without a name");
        }
        if (a.noise_std < 0.0 || !(a.tdt_scale > 0.0)) {
            throw std::invalid_argument("scenario: appliance '" + a.name + "' has bad options");
        }
        for (double t : a.activations) {
            if (!(t >= 0.0) || t >= duration) {
                throw std::invalid_argument("scenario: activation of '" + a.name +
                                            "' outside the duration");
            }
        }
    }
}

Scenario synthesize_scenario(const ScenarioSpec& spec) {
    spec.validate();
    const auto n = static_cast<Index>(std::llround(spec.duration * spec.rate));
    Rng rng(spec.seed);

    struct Placed {
        std::size_t appliance;
        Index at;
        Cycle cycle;
    };
    std::vector<Placed> placed;

    auto make = [&](std::size_t i) {
        const auto& a = spec.appliances[i];
        CycleOptions opt;
        opt.idle_before = 0.0;
        opt.idle_after = 0.0;
        opt.tdt_scale = a.tdt_scale;
        opt.name = a.name;
        return reconstruct_cycle(a.on, a.off ? &*a.off : nullptr, spec.rate, rng, opt);
    };

    for (std::size_t i = 0; i < spec.appliances.size(); ++i) {
        for (double t : spec.appliances[i].activations) {
            placed.push_back({i, static_cast<Index>(std::llround(t * spec.rate)), make(i)});
        }
    }

    // Counted cycles: shuffled, then laid end to end with random spacing.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < spec.appliances.size(); ++i) {
        order.insert(order.end(), spec.appliances[i].count, i);
    }
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> gap(spec.min_gap, 2.0 * spec.min_gap);
    double cursor = spec.min_gap;
    for (std::size_t i : order) {
        const auto at = static_cast<Index>(std::llround(cursor * spec.rate));
        Cycle c = make(i);
        const Index last = at + c.transition_starts.back();
        if (at + c.samples.size() > n) {
            throw std::invalid_argument("scenario: counted cycles do not fit in the duration");
        }
        const double steady_gap =
            static_cast<double>(c.transition_starts[1] - c.transition_starts[0]) / spec.rate;
        if (steady_gap < spec.min_gap) {
            throw std::invalid_argument("scenario: a cycle of '" + spec.appliances[i].name +
                                        "' is shorter than min_gap");
        }
        placed.push_back({i, at, std::move(c)});
        cursor = static_cast<double>(last) / spec.rate + gap(rng);
    }

    Scenario out;
    out.components.resize(spec.appliances.size());
    for (std::size_t i = 0; i < spec.appliances.size(); ++i) {
        out.components[i].first = spec.appliances[i].name;
        out.components[i].second.assign(n, 0.0);
    }
    std::vector<std::vector<std::pair<Index, Index>>> busy(spec.appliances.size());
    for (const auto& p : placed) {
        const auto& a = spec.appliances[p.appliance];
        auto& comp = out.components[p.appliance].second;
        const Index from = p.at;
        const Index to = std::min(n, p.at + p.cycle.samples.size());  // exclusive
        for (const auto& [f, t] : busy[p.appliance]) {
            if (from < t && f < to) {
                throw std::invalid_argument("scenario: activations of '" + a.name + "' overlap");
            }
        }
        busy[p.appliance].emplace_back(from, to);
        for (Index j = from; j < to; ++j) {
            comp[j] += p.cycle.samples[j - from];
        }
        if (a.noise_std > 0.0) {
            std::normal_distribution<double> noise(0.0, a.noise_std);
            const auto& ts = p.cycle.transition_starts;
            const auto& te = p.cycle.transition_ends;
            for (Index j = te[0] + 1; j < ts[1] && from + j < to; ++j) {
                comp[from + j] += noise(rng);
            }
        }
        for (std::size_t k = 0; k < p.cycle.truth.size(); ++k) {
            const Index at = from + p.cycle.transition_starts[k];
            if (at < n) {
                out.truth.push_back({static_cast<double>(at) / spec.rate, p.cycle.truth[k].label});
            }
        }
    }

    std::vector<double> agg(n, 0.0);
    for (const auto& [name, comp] : out.components) {
        for (Index j = 0; j < n; ++j) {
            agg[j] += comp[j];
        }
    }
    if (spec.noise_std > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.noise_std);
        for (double& v : agg) {
            v += noise(rng);
        }
    }
    out.aggregate = PowerSeries(std::move(agg), spec.rate);
    std::stable_sort(out.truth.begin(), out.truth.end(),
                     [](const GroundTruthEvent& x, const GroundTruthEvent& y) {
                         return x.time < y.time;
                     });
    return out;
}

}  // namespace nilm
