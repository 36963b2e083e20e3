#pragma once

// Synthetic series and parameter sets shared by unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include "nilm/reconstruction.hpp"
#include "nilm/series.hpp"
#include "nilm/signatures.hpp"

namespace fixtures {

inline std::vector<double> constant(std::size_t n, double level) {
    return std::vector<double>(n, level);
}

/// Steps: level changes by heights[j] at index positions[j].
inline std::vector<double> steps(std::size_t n, double base, const std::vector<std::size_t>& positions,
                                 const std::vector<double>& heights) {
    std::vector<double> v(n, base);
    for (std::size_t j = 0; j < positions.size(); ++j) {
        for (std::size_t i = positions[j]; i < n; ++i) {
            v[i] += heights[j];
        }
    }
    return v;
}

/// Staircase transition: `ramps` linear ramps of `ramp_len` samples
/// separated by flat saddles of `saddle_len` samples, rising `amplitude`
/// in total. Flat `lead` samples before and `tail` samples after.
inline std::vector<double> staircase(std::size_t lead, std::size_t ramps, std::size_t ramp_len,
                                     std::size_t saddle_len, double amplitude, std::size_t tail) {
    std::vector<double> v(lead, 0.0);
    const double per_ramp = amplitude / static_cast<double>(ramps);
    const double slope = per_ramp / static_cast<double>(ramp_len);
    double level = 0.0;
    for (std::size_t r = 0; r < ramps; ++r) {
        for (std::size_t j = 0; j < ramp_len; ++j) {
            level += slope;
            v.push_back(level);
        }
        if (r + 1 < ramps) {
            v.insert(v.end(), saddle_len, level);
        }
    }
    v.insert(v.end(), tail, amplitude);
    return v;
}

inline void add_noise(std::vector<double>& v, double std, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, std);
    for (double& x : v) {
        x += n(rng);
    }
}

/// White noise around `mean`, rescaled so the population std is exactly `std`.
inline std::vector<double> exact_std_noise(std::size_t n, double mean, double std,
                                           std::uint64_t seed) {
    std::vector<double> v(n, 0.0);
    add_noise(v, 1.0, seed);
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double s = std::sqrt(ss / static_cast<double>(n));
    for (double& x : v) x = mean + (x - m) * std / s;
    return v;
}

/// Square wave of +-amplitude around `mean`, `freq` Hz at `rate` Hz.
inline std::vector<double> square_wave(std::size_t n, double mean, double amplitude, double freq,
                                       double rate) {
    std::vector<double> v(n);
    const auto half = static_cast<std::size_t>(std::llround(rate / freq / 2.0));
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = mean + ((i / half) % 2 == 0 ? amplitude : -amplitude);
    }
    return v;
}

inline nilm::GaussianParam g(double mean, double std) {
    return {mean, std, 1};
}

/// Kettle and vacuum signature parameters (mean, std) per signature.
inline nilm::SignatureSet kettle_set() {
    nilm::SignatureSet s;
    s.form = nilm::WaveForm::R;
    s.alpha = g(1139, 9.8);
    s.beta = g(1138, 10.1);
    s.gamma = g(0.48, 0.28);
    s.delta = g(0.48, 0.28);
    s.mu = g(1027, 5.2);
    s.tau = g(514, 43.2);
    s.label = {0, 1};
    return s;
}

inline nilm::SignatureSet vacuum_set() {
    nilm::SignatureSet s;
    s.form = nilm::WaveForm::D;
    s.alpha = g(2339, 71);
    s.beta = g(1101, 64);
    s.gamma = g(0.14, 0.1);
    s.delta = g(1.14, 0.33);
    s.mu = g(1002, 22.1);
    s.tau = g(225, 16.5);
    s.label = {0, 1};
    return s;
}

}  // namespace fixtures
