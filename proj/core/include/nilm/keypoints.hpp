#pragma once

#include "nilm/event.hpp"
#include "nilm/series.hpp"

namespace nilm {

struct KeyPoint {
    Index index = 0;
    double value = 0.0;

    friend bool operator==(const KeyPoint&, const KeyPoint&) = default;
};

struct KeyPoints {
    KeyPoint start;
    KeyPoint spike;
    KeyPoint end;
    bool degenerate = false;
};

/// Locates the start, spike and end of a transition inside [from, to].
///
/// - end:   first index of the longest suffix of the span whose samples all
///          lie within `tolerance` of post_mean.
/// - start: last index before `end` whose sample lies within `tolerance` of
///          pre_mean (the point the sustained departure leaves from).
/// - spike: extremal deviation from pre_mean in [start, end], in the
///          direction of the transition; earliest on ties.
///
/// When no qualifying start or end exists the span boundaries are used and
/// `degenerate` is set. Throws std::out_of_range if the span is invalid.
[[nodiscard]] KeyPoints locate_keypoints(const PowerSeries& series, Index from, Index to,
                                         double pre_mean, double post_mean, double tolerance);

/// Builds a DetectedEvent for the span, filling keypoints and direction.
[[nodiscard]] DetectedEvent make_event(const PowerSeries& series, Index from, Index to,
                                       double pre_mean, double post_mean, double tolerance,
                                       Provenance provenance);

}  // namespace nilm
