#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nilm/evaluation.hpp"
#include "nilm/series.hpp"
#include "nilm/signatures.hpp"

namespace nilm {

using Rng = std::mt19937_64;

struct CycleOptions {
    double idle_before = 5.0;  // seconds of base level before the on transition
    double idle_after = 5.0;   // seconds of base level after the off transition
    double base = 0.0;
    double tdt_scale = 1.0;    // stretches both transitions (long-transition cases)
    std::string name;          // truth label prefix, "name:0->1"
};

/// One on/off cycle drawn from the set's Gaussians.
///
/// On transition (from sample s): R-form ramps linearly to base + beta over
/// delta; D-form rises to base + alpha over gamma, then falls to
/// base + beta at delta. The steady period lasts tau and drifts linearly so
/// its mean equals mu. The off transition ramps back to base over a fresh
/// delta, taken from `off` when given. Ground truth marks both transition
/// starts.
struct Cycle {
    std::vector<double> samples;
    std::vector<Index> transition_starts;  // on, off
    std::vector<Index> transition_ends;
    std::vector<GroundTruthEvent> truth;   // times relative to sample 0
};

/// Durations are redrawn (at most 100 times) until longer than one sample;
/// a D-form delta is also redrawn until it exceeds gamma.
/// Throws std::runtime_error when the redraw budget runs out.
[[nodiscard]] Cycle reconstruct_cycle(const SignatureSet& on, const SignatureSet* off, double rate,
                                      Rng& rng, const CycleOptions& options = {});
[[nodiscard]] Cycle reconstruct_cycle(const SignatureSet& on, double rate, std::uint64_t seed,
                                      const CycleOptions& options = {});

struct ApplianceEntry {
    std::string name;
    SignatureSet on;
    std::optional<SignatureSet> off;
    std::vector<double> activations;  // on-transition times, seconds
    std::size_t count = 0;            // extra cycles placed by the scheduler
    double noise_std = 0.0;           // extra noise while this appliance is on
    double tdt_scale = 1.0;
};

struct ScenarioSpec {
    double rate = 50.0;
    double duration = 600.0;
    double noise_std = 0.0;
    std::uint64_t seed = 1;
    // Scheduler: minimum spacing between any two transitions of counted cycles.
    double min_gap = 5.0;
    std::vector<ApplianceEntry> appliances;

    /// Throws std::invalid_argument on an unusable spec.
    void validate() const;
};

struct Scenario {
    PowerSeries aggregate;
    std::vector<GroundTruthEvent> truth;  // time-sorted
    std::vector<std::pair<std::string, std::vector<double>>> components;
};

/// Aggregate = sum of components + white noise of noise_std. Explicit
/// activations are placed as given; counted cycles are laid out one after
/// another in random order with gaps of [min_gap, 2 * min_gap] between
/// transitions, starting at min_gap. Throws
/// std::invalid_argument when cycles of one appliance overlap or do not fit.
[[nodiscard]] Scenario synthesize_scenario(const ScenarioSpec& spec);

}  // namespace nilm
