#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nilm/event.hpp"
#include "nilm/series.hpp"

namespace nilm::wamma {

/// Detector parameters. r_m and r_w are durations in seconds; the sample
/// counts are derived from the series rate (N = round(r * f)).
struct DetectorConfig {
    double r_m = 0.2;
    double r_w = 2.0;
    double p_thre_init = 15.0;
    double trend_majority = 0.60;
    double std_factor = 0.20;
    int macro_attempt_limit = 32;
    /// Probe drift (in standard errors of the margin noise) that keeps
    /// macro_screen going on slow ramps.
    double drift_sigmas = 3.0;

    [[nodiscard]] Index margin_samples(double rate) const;
    [[nodiscard]] Index window_samples(double rate) const;
    /// Throws std::invalid_argument if the config is unusable at `rate`.
    void validate(double rate) const;
};

/// Border lines of the two margins plus the live threshold.
/// Invariant: left_l <= left_r < right_l <= right_r.
struct WindowState {
    Index left_l = 0;
    Index left_r = 0;
    Index right_l = 0;
    Index right_r = 0;
    double p_thre_current = 0.0;
    double s_cum = 0.0;

    friend bool operator==(const WindowState&, const WindowState&) = default;
};

struct WindowMeasurements {
    double dp_left = 0.0;    // |o[L_r] - o[L_l]|
    double dp_right = 0.0;   // |o[R_r] - o[R_l]|
    double mean_left = 0.0;
    double mean_right = 0.0;
    double dp = 0.0;         // mean_right - mean_left
};

struct MarginSteadiness {
    bool left = false;
    bool right = false;
};

struct TrendFractions {
    double negative = 0.0;
    double positive = 0.0;
};

struct CusumCheck {
    bool event_pending = false;
    std::optional<Index> crossing;
};

/// Suspicious-event span reported by the micro-timescale scan.
struct SampleSpan {
    Index from = 0;
    Index to = 0;

    friend bool operator==(const SampleSpan&, const SampleSpan&) = default;
};

[[nodiscard]] WindowState initial_window(Index left_l, double rate, const DetectorConfig& cfg,
                                         double p_thre_current);

[[nodiscard]] WindowMeasurements window_measurements(const PowerSeries& series,
                                                     const WindowState& state);

/// Inclusive: a border difference equal to the threshold counts as steady.
[[nodiscard]] MarginSteadiness margins_steady(const WindowMeasurements& m, double p_thre_current);

/// Fractions of negative / positive signs; zero signs count in the
/// denominator only. Throws std::out_of_range on an empty list.
[[nodiscard]] TrendFractions trend_fraction(std::span<const SampleDelta> deltas);

/// Net direction of a run of deltas: +1 / -1 when one sign holds more than
/// `majority` of the signs and the opposing signs carry less than
/// (1 - majority) of the total absolute change, 0 otherwise.
[[nodiscard]] int directional_trend(std::span<const SampleDelta> deltas, double majority);

/// Moves L_r left and the right margin right until both margins are steady
/// and free of a directional trend. For the right margin only a trend in the
/// direction of the window's ΔP counts. L_l never moves; the right margin
/// keeps its width. Returns std::nullopt when the right margin would run past the
/// end of the series (not enough data yet).
[[nodiscard]] std::optional<WindowState> adjust_margins(const PowerSeries& series,
                                                        const WindowState& state,
                                                        const DetectorConfig& cfg);

/// Modified CUSUM over d[from..to] with sign-trend suppression.
///
/// S_i accumulates from zero; the crossing is the first index where |S_i|
/// exceeds the state's threshold. Opposing changes must carry less than
/// (1 - trend_majority) of the absolute change: over every delta for short
/// ranges, or over the N_m deltas either side of the crossing for ranges of
/// at least three margins. Long ranges are also rejected when margin-wide
/// block means reverse direction more than once (oscillation).
[[nodiscard]] CusumCheck cusum_event_check(const PowerSeries& series, const WindowState& state,
                                           const DetectorConfig& cfg, Index from, Index to);

/// One-margin probe beyond R_r. While the probe shows a trend in the
/// transition's direction, a border change above threshold or a mean drift
/// in that direction above drift_sigmas standard errors, the right
/// margin is moved onto the probe and re-settled (at most
/// macro_attempt_limit times). A probe past the series end stops the scan.
[[nodiscard]] WindowState macro_screen(const PowerSeries& series, const WindowState& state,
                                       const DetectorConfig& cfg);

/// Slides an N_m-wide sub-window over [window_from, window_to] and returns
/// one span per maximal run of firing positions. Adjacent runs are merged
/// unless a steady plateau separates them.
[[nodiscard]] std::vector<SampleSpan> micro_screen(const PowerSeries& series, Index window_from,
                                                   Index window_to, const DetectorConfig& cfg,
                                                   double p_thre_current);

/// p_thre_current = max(p_thre_init, std_factor * window_std).
[[nodiscard]] WindowState update_threshold(const WindowState& state, const DetectorConfig& cfg,
                                           double window_std);

struct DetectionResult {
    std::vector<DetectedEvent> events;
    // Threshold active when each event was emitted (parallel to events).
    std::vector<double> thresholds;
    double final_threshold = 0.0;
    std::vector<std::string> diagnostics;
};

/// Single forward pass over the series. Owns its window state; one
/// instance per stream.
class Detector {
public:
    explicit Detector(DetectorConfig cfg) : cfg_(cfg) {}

    [[nodiscard]] DetectionResult run(const PowerSeries& series) const;
    [[nodiscard]] const DetectorConfig& config() const noexcept { return cfg_; }

private:
    DetectorConfig cfg_;
};

[[nodiscard]] std::vector<DetectedEvent> detect_events(const PowerSeries& series,
                                                       const DetectorConfig& cfg);

}  // namespace nilm::wamma
