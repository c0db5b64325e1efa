/**
 * @file helpers.hpp
 * @brief Shared test utilities: deterministic generators and the independent
 *        oracles the module tests check against.
 */

#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "banfusion/records.hpp"

namespace banfusion::test {

/// Brute-force sample standard deviation straight from its definition.
inline double sdnn_oracle(const std::vector<double>& xs) {
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/// Brute-force quadratic mean of successive differences.
inline double rmssd_oracle(const std::vector<double>& xs) {
    double ss = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        ss += (xs[i] - xs[i - 1]) * (xs[i] - xs[i - 1]);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/// Spherical law of cosines, the independent distance oracle.
inline double spherical_law_of_cosines_m(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kR = 6'371'000.0;
    const double p1 = lat1 * std::numbers::pi / 180.0;
    const double p2 = lat2 * std::numbers::pi / 180.0;
    const double dl = (lon2 - lon1) * std::numbers::pi / 180.0;
    const double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
    return kR * std::acos(std::min(1.0, std::max(-1.0, c)));
}

/// Beats whose intervals follow rr(t): t_{k+1} = t_k + rr(t_k).
inline std::vector<ReconstructedBeat> modulated_beats(double base_ms, double amp_ms,
                                                      double freq_hz, double span_s,
                                                      const std::string& device = "s1") {
    std::vector<ReconstructedBeat> beats;
    double t_ms = 0;
    std::int64_t seq = 0;
    while (t_ms <= span_s * 1000.0) {
        const double rr =
            base_ms + amp_ms * std::sin(2.0 * std::numbers::pi * freq_hz * t_ms / 1000.0);
        t_ms += rr;
        beats.push_back({device, seq++, static_cast<TimestampMs>(std::llround(t_ms)),
                         static_cast<std::int64_t>(std::llround(rr))});
    }
    return beats;
}

/// Constant-interval beats.
inline std::vector<ReconstructedBeat> constant_beats(std::int64_t rr_ms, double span_s,
                                                     const std::string& device = "s1",
                                                     TimestampMs t0 = 0) {
    std::vector<ReconstructedBeat> beats;
    TimestampMs t = t0;
    std::int64_t seq = 0;
    while (t - t0 <= static_cast<TimestampMs>(span_s * 1000.0)) {
        t += rr_ms;
        beats.push_back({device, seq++, t, rr_ms});
    }
    return beats;
}

/// One-sided band energies from a direct DFT of a (mean-removed) series.
struct BandEnergy {
    double lf = 0;
    double hf = 0;
};

inline BandEnergy dft_band_energy(const std::vector<double>& series, double fs_hz) {
    const std::size_t n = series.size();
    double mean = 0;
    for (double x : series) mean += x;
    mean /= static_cast<double>(n);

    BandEnergy out;
    const double df = fs_hz / static_cast<double>(n);
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const double f = df * static_cast<double>(k);
        if (f < 0.04 || f >= 0.40) continue;
        double re = 0, im = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double phase =
                -2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(n);
            re += (series[i] - mean) * std::cos(phase);
            im += (series[i] - mean) * std::sin(phase);
        }
        const double energy = re * re + im * im;
        if (f < 0.15) out.lf += energy;
        else out.hf += energy;
    }
    return out;
}

/// The test's own linear-interpolation resampler (independent of the
/// implementation's).
inline std::vector<double> resample_oracle(const std::vector<ReconstructedBeat>& beats,
                                           double fs_hz) {
    std::vector<double> out;
    const double step = 1000.0 / fs_hz;
    const double t0 = static_cast<double>(beats.front().beat_ts);
    const double t_end = static_cast<double>(beats.back().beat_ts);
    for (double t = t0; t <= t_end + 1e-9; t += step) {
        std::size_t i = 1;
        while (i + 1 < beats.size() && static_cast<double>(beats[i].beat_ts) < t) ++i;
        const double ta = static_cast<double>(beats[i - 1].beat_ts);
        const double tb = static_cast<double>(beats[i].beat_ts);
        const double w = tb > ta ? std::min(1.0, std::max(0.0, (t - ta) / (tb - ta))) : 0.0;
        out.push_back(static_cast<double>(beats[i - 1].rr_ms) +
                      w * static_cast<double>(beats[i].rr_ms - beats[i - 1].rr_ms));
    }
    return out;
}

} // namespace banfusion::test
