#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nilm/event.hpp"
#include "nilm/keypoints.hpp"
#include "nilm/series.hpp"

namespace nilm {

enum class PeriodKind { steady, transient };

struct Period {
    PeriodKind kind = PeriodKind::steady;
    Index from = 0;
    Index to = 0;
    double mean = 0.0;  // steady periods only
    // For transients: position of the event in the input list.
    std::size_t event = 0;
};

/// Periods tiling [0, size) in order.
struct Segmentation {
    std::vector<Period> periods;
};

/// Steady periods are the gaps between event spans [start, end]. Empty gaps
/// are dropped, so two abutting events yield adjacent transients.
/// Throws std::invalid_argument on unordered or overlapping events.
[[nodiscard]] Segmentation segment_series(const PowerSeries& series,
                                          std::span<const DetectedEvent> events);

/// Keypoints of an already detected event, using its own span.
[[nodiscard]] KeyPoints locate_keypoints(const PowerSeries& series, const DetectedEvent& event,
                                         double pre_mean, double post_mean, double p_thre);

struct RawTransition {
    double dts = 0.0;  // spike value - pre mean (W)
    double trs = 0.0;  // start to spike (s)
    double dsp = 0.0;  // post mean - pre mean (W)
    double tdt = 0.0;  // start to end (s)
    bool degenerate = false;
};

struct RawSteady {
    double ssp = 0.0;  // mean power (W)
    double std = 0.0;  // duration (s)
};

/// Steady durations run from the end keypoint of the preceding transition to
/// the start keypoint of the next one (series ends count as keypoints), so a
/// steady period of m samples lasts (m + 1) / f seconds between two events.
struct Extraction {
    std::vector<RawTransition> transitions;  // one per event
    std::vector<RawSteady> steadies;         // one per steady period in seg
};

[[nodiscard]] Extraction extract_signatures(const PowerSeries& series, const Segmentation& seg,
                                            std::span<const DetectedEvent> events);

struct GaussianParam {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;

    friend bool operator==(const GaussianParam&, const GaussianParam&) = default;
};

/// Mean and population standard deviation. Throws on empty input.
[[nodiscard]] GaussianParam fit_gaussian(std::span<const double> values);

enum class WaveForm { R, D };

[[nodiscard]] std::string_view to_string(WaveForm f) noexcept;
[[nodiscard]] std::optional<WaveForm> parse_waveform(std::string_view s) noexcept;

/// D-form iff |alpha.mean| > |beta.mean| + p_thre.
[[nodiscard]] WaveForm classify_waveshape(const GaussianParam& alpha, const GaussianParam& beta,
                                          double p_thre);

/// Single-linkage clustering of 1-D means with a gap cut at merge_tol.
/// Labels count up from 0 in ascending mean order, so the lowest cluster is 0.
[[nodiscard]] std::vector<int> cluster_steady_states(std::span<const double> means,
                                                     double merge_tol);

struct TransitionLabel {
    int from = 0;
    int to = 0;

    friend auto operator<=>(const TransitionLabel&, const TransitionLabel&) = default;
};

struct SignatureSet {
    WaveForm form = WaveForm::R;
    GaussianParam alpha;  // DTS
    GaussianParam gamma;  // TRS
    GaussianParam beta;   // DSP
    GaussianParam delta;  // TDT
    TransitionLabel label;
    GaussianParam mu;   // SSP of the state entered
    GaussianParam tau;  // STD of the state entered

    friend bool operator==(const SignatureSet&, const SignatureSet&) = default;
};

struct SignatureOptions {
    double p_thre = 15.0;
    // Defaults to 2 * p_thre when unset.
    std::optional<double> merge_tol;
};

/// Full pipeline for one appliance's series: segment, extract, cluster the
/// steady periods into states, then fit one SignatureSet per transition
/// label. Transitions lacking a steady period on either side are skipped.
/// Sets are ordered by label.
[[nodiscard]] std::vector<SignatureSet> build_signature_sets(const PowerSeries& series,
                                                             std::span<const DetectedEvent> events,
                                                             const SignatureOptions& options = {});

}  // namespace nilm
