#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nilm/event.hpp"
#include "nilm/series.hpp"

namespace nilm {

struct GroundTruthEvent {
    double time = 0.0;  // seconds
    std::string label;

    friend bool operator==(const GroundTruthEvent&, const GroundTruthEvent&) = default;
};

/// Detected event reduced to its time span, in seconds.
struct TimeSpan {
    double start = 0.0;
    double end = 0.0;
};

[[nodiscard]] std::vector<TimeSpan> event_spans(const PowerSeries& series,
                                                std::span<const DetectedEvent> events);

struct MatchCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t ed = 0;
    std::int64_t eg = 0;

    friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

/// Greedy one-to-one matching in time order. Each detection takes the
/// nearest unmatched truth inside [start - tolerance, end + tolerance]
/// (distance measured to the span, earliest truth on ties).
/// Throws std::invalid_argument on a negative tolerance.
[[nodiscard]] MatchCounts match_events(std::span<const TimeSpan> detected,
                                       std::span<const GroundTruthEvent> truth,
                                       double tolerance = 1.0);

/// Percentage in tenths of a percent, rounded half-up: 99.17% -> 992.
/// Exact integer arithmetic; den must be positive.
[[nodiscard]] std::int64_t percent_tenths(std::int64_t num, std::int64_t den);

/// "99.2" style rendering of a tenths value.
[[nodiscard]] std::string format_tenths(std::int64_t tenths);

struct MatchReport {
    MatchCounts counts;
    double tpp = 0.0;
    double fpp = 0.0;
    double fnp = 0.0;
    double f1 = 0.0;
    // Same quantities as rounded tenths of a percent.
    std::int64_t tpp_tenths = 0;
    std::int64_t fpp_tenths = 0;
    std::int64_t fnp_tenths = 0;
    std::int64_t f1_tenths = 0;
};

/// TPP = TP/EG, FPP = FP/ED (0 when ED = 0), FNP = FN/EG,
/// f1 = TP / (TP + (FP + FN) / 2). Throws std::invalid_argument on
/// inconsistent counts or EG = 0.
[[nodiscard]] MatchReport compute_metrics(std::int64_t tp, std::int64_t fp, std::int64_t fn,
                                          std::int64_t ed, std::int64_t eg);
[[nodiscard]] MatchReport compute_metrics(const MatchCounts& c);

struct GridRow {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    double increment = 0.0;
};

struct ParameterGrid {
    std::vector<GridRow> rows;

    /// Throws std::invalid_argument on an empty grid or a bad row.
    void validate() const;
    [[nodiscard]] std::size_t size() const;
};

using ParameterSet = std::map<std::string, double, std::less<>>;

struct Combination {
    std::size_t index = 0;  // numbered from 1
    std::vector<std::pair<std::string, double>> values;

    [[nodiscard]] ParameterSet as_set() const;
};

/// Cartesian product with the last row varying fastest.
[[nodiscard]] std::vector<Combination> enumerate_grid(const ParameterGrid& grid);

/// Known detector names: "wamma", "step", "wm", "cusum".
[[nodiscard]] bool is_known_detector(std::string_view name);
/// Parameter names accepted by a detector, in canonical order.
[[nodiscard]] std::vector<std::string> detector_parameters(std::string_view name);

/// Runs a detector by name. Parameters not given keep their defaults.
/// Throws std::invalid_argument on an unknown detector or parameter.
[[nodiscard]] std::vector<DetectedEvent> run_detector(std::string_view name,
                                                      const PowerSeries& series,
                                                      const ParameterSet& params);

struct SweepRow {
    Combination combination;
    MatchReport report;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // in combination order
    std::size_t best = 0;        // position in rows of the highest f1, lowest index on ties
};

struct SweepOptions {
    double tolerance = 1.0;
    unsigned threads = 1;
};

[[nodiscard]] SweepResult sweep(const PowerSeries& series, std::span<const GroundTruthEvent> truth,
                                std::string_view detector, const ParameterGrid& grid,
                                const SweepOptions& options = {});

}  // namespace nilm
