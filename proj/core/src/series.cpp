#include "nilm/series.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nilm {

PowerSeries::PowerSeries(std::vector<double> samples, double rate, double origin_time)
    : samples_(std::move(samples)), rate_(rate), origin_time_(origin_time) {
    if (!(rate_ > 0.0) || !std::isfinite(rate_)) {
        throw std::invalid_argument("PowerSeries: rate must be a positive finite number");
    }
    if (!std::isfinite(origin_time_)) {
        throw std::invalid_argument("PowerSeries: origin_time must be finite");
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!std::isfinite(samples_[i])) {
            throw std::invalid_argument("PowerSeries: non-finite sample at index " + std::to_string(i));
        }
    }
}

double PowerSeries::at(Index i) const {
    if (i >= samples_.size()) {
        throw std::out_of_range("PowerSeries: index " + std::to_string(i) + " out of range");
    }
    return samples_[i];
}

Index PowerSeries::samples_for(double seconds) const noexcept {
    const double n = std::round(seconds * rate_);
    return n <= 0.0 ? 0 : static_cast<Index>(n);
}

std::vector<SampleDelta> diff_series(const PowerSeries& series, Index from, Index to) {
    if (from < 1 || from > to || to >= series.size()) {
        throw std::out_of_range("diff_series: need 1 <= from <= to < length");
    }
    std::vector<SampleDelta> out;
    out.reserve(to - from + 1);
    for (Index i = from; i <= to; ++i) {
        const double d = series[i] - series[i - 1];
        out.push_back({i, d, sign_of(d)});
    }
    return out;
}

double range_mean(const PowerSeries& series, Index from, Index to) {
    if (from > to || to >= series.size()) {
        throw std::out_of_range("range_mean: empty or out-of-range window");
    }
    double sum = 0.0;
    for (Index i = from; i <= to; ++i) {
        sum += series[i];
    }
    return sum / static_cast<double>(to - from + 1);
}

WindowStats window_stats(const PowerSeries& series, Index from, Index to) {
    if (from > to || to >= series.size()) {
        throw std::out_of_range("window_stats: empty or out-of-range window");
    }
    // Two-pass for accuracy; windows are short enough that the second pass is free.
    const double mean = range_mean(series, from, to);
    double ss = 0.0;
    for (Index i = from; i <= to; ++i) {
        const double e = series[i] - mean;
        ss += e * e;
    }
    return {mean, std::sqrt(ss / static_cast<double>(to - from + 1))};
}

double RunningStats::stddev() const noexcept {
    return std::sqrt(variance());
}

}  // namespace nilm
