#pragma once

#include <vector>

#include "nilm/event.hpp"
#include "nilm/series.hpp"

// Fixed-parameter reference detectors. None of them adapts any parameter;
// they exist to reproduce the failure modes of fixed windows and
// thresholds (long transitions split, near-simultaneous events merged,
// fluctuations flagged).
namespace nilm::baselines {

/// Step-change detector: two adjacent windows of r seconds slide over the
/// series and an event is flagged where their means differ by more than
/// p_thre. A flagged run becomes one event, but runs longer than two
/// windows are cut into several.
struct StepChangeConfig {
    double r = 1.0;
    double p_thre = 15.0;
};

/// Window with margins, fixed parameters. r_d: primary window, r_f:
/// secondary window used to extend and place the flagged span, r_m: margin.
struct WmConfig {
    double r_d = 2.0;
    double r_f = 1.0;
    double r_m = 0.2;
    double p_thre = 15.0;
};

/// Two-sided CUSUM of deviations from the rolling mean of the previous
/// r seconds; accumulators and reference reset after each detection.
struct CusumConfig {
    double r = 1.0;
    double p_thre = 100.0;
};

void validate(const StepChangeConfig& cfg, double rate);
void validate(const WmConfig& cfg, double rate);
void validate(const CusumConfig& cfg, double rate);

[[nodiscard]] std::vector<DetectedEvent> step_change_detect(const PowerSeries& series,
                                                            const StepChangeConfig& cfg);
[[nodiscard]] std::vector<DetectedEvent> wm_fixed_detect(const PowerSeries& series,
                                                         const WmConfig& cfg);
[[nodiscard]] std::vector<DetectedEvent> cusum_detect(const PowerSeries& series,
                                                      const CusumConfig& cfg);

}  // namespace nilm::baselines
