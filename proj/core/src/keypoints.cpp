#include "nilm/keypoints.hpp"

#include <cmath>
#include <stdexcept>

namespace nilm {

KeyPoints locate_keypoints(const PowerSeries& series, Index from, Index to,
                           double pre_mean, double post_mean, double tolerance) {
    if (from > to || to >= series.size()) {
        throw std::out_of_range("locate_keypoints: span out of range");
    }
    if (tolerance < 0.0) {
        throw std::invalid_argument("locate_keypoints: negative tolerance");
    }
    KeyPoints kp;

    // End: first index of the maximal in-band suffix.
    Index end = to + 1;
    while (end > from && std::abs(series[end - 1] - post_mean) <= tolerance) {
        --end;
    }
    if (end > to) {
        end = to;
        kp.degenerate = true;
    }

    // Start: last in-band sample of the previous level before the end.
    Index start = end;
    bool found_start = false;
    while (start > from) {
        --start;
        if (std::abs(series[start] - pre_mean) <= tolerance) {
            found_start = true;
            break;
        }
    }
    if (!found_start) {
        start = from;
        kp.degenerate = true;
    }

    const bool rising = post_mean >= pre_mean;
    Index spike = start;
    double best = series[start] - pre_mean;
    for (Index i = start + 1; i <= end; ++i) {
        const double dev = series[i] - pre_mean;
        if (rising ? dev > best : dev < best) {
            best = dev;
            spike = i;
        }
    }

    kp.start = {start, series[start]};
    kp.spike = {spike, series[spike]};
    kp.end = {end, series[end]};
    return kp;
}

DetectedEvent make_event(const PowerSeries& series, Index from, Index to,
                         double pre_mean, double post_mean, double tolerance,
                         Provenance provenance) {
    const KeyPoints kp = locate_keypoints(series, from, to, pre_mean, post_mean, tolerance);
    DetectedEvent ev;
    ev.start = kp.start.index;
    ev.spike = kp.spike.index;
    ev.end = kp.end.index;
    ev.direction = post_mean > pre_mean ? Direction::rising : Direction::falling;
    ev.pre_mean = pre_mean;
    ev.post_mean = post_mean;
    ev.provenance = provenance;
    ev.degenerate = kp.degenerate;
    return ev;
}

}  // namespace nilm
