#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace nilm {

using Index = std::size_t;

/// Uniformly sampled active-power observations (watts).
///
/// Sample i sits at origin_time + i / rate seconds. Construction rejects a
/// non-positive rate and non-finite samples, so every algorithm downstream
/// can assume clean input.
class PowerSeries {
public:
    PowerSeries() = default;
    PowerSeries(std::vector<double> samples, double rate, double origin_time = 0.0);

    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
    [[nodiscard]] double operator[](Index i) const noexcept { return samples_[i]; }
    [[nodiscard]] double at(Index i) const;
    [[nodiscard]] Index size() const noexcept { return samples_.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }

    [[nodiscard]] double rate() const noexcept { return rate_; }
    [[nodiscard]] double origin_time() const noexcept { return origin_time_; }
    [[nodiscard]] double time_of(Index i) const noexcept {
        return origin_time_ + static_cast<double>(i) / rate_;
    }

    /// Number of samples covering `seconds` at this rate (rounded).
    [[nodiscard]] Index samples_for(double seconds) const noexcept;

private:
    std::vector<double> samples_;
    double rate_ = 1.0;
    double origin_time_ = 0.0;
};

struct SampleDelta {
    Index index = 0;
    double d = 0.0;
    int sign = 0;

    friend bool operator==(const SampleDelta&, const SampleDelta&) = default;
};

/// -1, 0 or +1.
[[nodiscard]] constexpr int sign_of(double d) noexcept {
    return (d > 0.0) - (d < 0.0);
}

/// First differences d_i = o_i - o_{i-1} for i in [from, to].
/// Requires 1 <= from <= to < size; throws std::out_of_range otherwise.
[[nodiscard]] std::vector<SampleDelta> diff_series(const PowerSeries& series, Index from, Index to);

struct WindowStats {
    double mean = 0.0;
    double std = 0.0;  // population (divide by N)
};

/// Mean and population standard deviation of samples [from, to].
[[nodiscard]] WindowStats window_stats(const PowerSeries& series, Index from, Index to);

/// Mean of samples [from, to]; throws std::out_of_range on a bad range.
[[nodiscard]] double range_mean(const PowerSeries& series, Index from, Index to);

/// Welford accumulator for streaming mean / population variance.
class RunningStats {
public:
    void push(double x) noexcept {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }
    void clear() noexcept { *this = RunningStats{}; }

    [[nodiscard]] std::size_t count() const noexcept { return n_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double variance() const noexcept {
        return n_ > 0 ? m2_ / static_cast<double>(n_) : 0.0;
    }
    [[nodiscard]] double stddev() const noexcept;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace nilm
