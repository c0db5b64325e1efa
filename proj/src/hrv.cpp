#include "banfusion/hrv.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace banfusion {

namespace {

double mean_of(std::span<const double> xs) {
    double sum = 0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

// Linear interpolation of the (beat_ts, rr) tachogram onto a uniform grid.
std::vector<double> resample(std::span<const ReconstructedBeat> beats, double fs_hz) {
    const double t0 = static_cast<double>(beats.front().beat_ts);
    const double t_end = static_cast<double>(beats.back().beat_ts);
    const double step_ms = 1000.0 / fs_hz;
    const auto n = static_cast<std::size_t>(std::floor((t_end - t0) / step_ms)) + 1;

    std::vector<double> out(n);
    std::size_t seg = 0; // beats[seg] .. beats[seg+1] brackets the grid point
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) * step_ms;
        while (seg + 2 < beats.size() && static_cast<double>(beats[seg + 1].beat_ts) < t) ++seg;
        const double ta = static_cast<double>(beats[seg].beat_ts);
        const double tb = static_cast<double>(beats[seg + 1].beat_ts);
        const double ya = static_cast<double>(beats[seg].rr_ms);
        const double yb = static_cast<double>(beats[seg + 1].rr_ms);
        const double w = tb > ta ? std::clamp((t - ta) / (tb - ta), 0.0, 1.0) : 0.0;
        out[i] = ya + w * (yb - ya);
    }
    return out;
}

// One-sided periodogram of a Hann-windowed segment, PSD units x^2/Hz.
void accumulate_periodogram(std::span<const double> segment, double fs_hz,
                            std::vector<double>& psd_sum) {
    const std::size_t n = segment.size();
    std::vector<double> window(n);
    double window_power = 0;
    for (std::size_t i = 0; i < n; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(n - 1)));
        window_power += window[i] * window[i];
    }

    const std::size_t n_bins = n / 2 + 1;
    for (std::size_t k = 0; k < n_bins; ++k) {
        std::complex<double> acc{0.0, 0.0};
        const double w0 = -2.0 * std::numbers::pi * static_cast<double>(k) /
                          static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double phase = w0 * static_cast<double>(i);
            acc += segment[i] * window[i] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        double scale = 1.0 / (fs_hz * window_power);
        if (k != 0 && !(n % 2 == 0 && k == n / 2)) scale *= 2.0; // one-sided
        psd_sum[k] += scale * std::norm(acc);
    }
}

} // namespace

double sdnn(std::span<const double> rr_ms) {
    if (rr_ms.size() < 2) throw Error(Errc::too_few_samples, "sdnn needs at least 2 intervals");
    const double mean = mean_of(rr_ms);
    double ss = 0;
    for (double x : rr_ms) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(rr_ms.size() - 1));
}

double rmssd(std::span<const double> rr_ms) {
    if (rr_ms.size() < 2) throw Error(Errc::too_few_samples, "rmssd needs at least 2 intervals");
    double ss = 0;
    for (std::size_t i = 1; i < rr_ms.size(); ++i) {
        const double d = rr_ms[i] - rr_ms[i - 1];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(rr_ms.size() - 1));
}

double mean_hr(std::span<const double> rr_ms) {
    if (rr_ms.empty()) throw Error(Errc::empty_input, "mean_hr needs at least 1 interval");
    return 60000.0 / mean_of(rr_ms);
}

BandPowers band_powers(std::span<const ReconstructedBeat> beats, const SpectralOptions& options) {
    if (beats.size() < static_cast<std::size_t>(kMinBeatsPerWindow)) {
        throw Error(Errc::too_short_record, "need at least 30 beats");
    }
    const DurationMs span = beats.back().beat_ts - beats.front().beat_ts;
    if (span < 120'000) throw Error(Errc::too_short_record, "need at least 120 s of beats");

    std::vector<double> series = resample(beats, options.resample_hz);
    const double mean = mean_of(series);
    for (double& x : series) x -= mean;

    auto segment_len = static_cast<std::size_t>(options.segment_s * options.resample_hz);
    segment_len = std::min(segment_len, series.size());
    const auto hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(segment_len) * (1.0 - options.overlap)));

    std::vector<double> psd(segment_len / 2 + 1, 0.0);
    std::size_t n_segments = 0;
    for (std::size_t start = 0; start + segment_len <= series.size(); start += hop) {
        accumulate_periodogram({series.data() + start, segment_len}, options.resample_hz, psd);
        ++n_segments;
    }
    for (double& p : psd) p /= static_cast<double>(n_segments);

    const double df = options.resample_hz / static_cast<double>(segment_len);
    BandPowers out;
    for (std::size_t k = 0; k < psd.size(); ++k) {
        const double f = df * static_cast<double>(k);
        if (f >= 0.04 && f < 0.15) out.lf_ms2 += psd[k] * df;
        else if (f >= 0.15 && f < 0.40) out.hf_ms2 += psd[k] * df;
    }
    return out;
}

double lf_hf_ratio(double lf, double hf) {
    if (hf == 0.0) throw Error(Errc::zero_denominator, "hf power is zero");
    return lf / hf;
}

double lf_norm(double lf, double hf) {
    if (lf + hf == 0.0) throw Error(Errc::zero_denominator, "lf + hf is zero");
    return 100.0 * lf / (lf + hf);
}

std::vector<HrvWindow> compute_hrv_windows(std::span<const ReconstructedBeat> beats,
                                           WindowMode mode, double hop_s, int min_beats,
                                           const SpectralOptions& spectral) {
    if (mode == WindowMode::sliding && !(hop_s > 0)) {
        throw Error(Errc::invalid_hop, "sliding mode needs hop_s > 0");
    }
    for (std::size_t i = 1; i < beats.size(); ++i) {
        if (beats[i].beat_ts < beats[i - 1].beat_ts) {
            throw Error(Errc::unsorted_input, "beats must be sorted by beat_ts");
        }
    }

    std::vector<HrvWindow> windows;
    if (beats.empty()) return windows;

    const TimestampMs t0 = beats.front().beat_ts;
    const TimestampMs span = beats.back().beat_ts - t0;
    const auto hop_ms = mode == WindowMode::tumbling
                            ? kHrvWindowMs
                            : static_cast<DurationMs>(std::llround(hop_s * 1000.0));

    std::size_t lo = 0;
    for (TimestampMs start = 0; start + kHrvWindowMs <= span; start += hop_ms) {
        const TimestampMs w_start = t0 + start;
        const TimestampMs w_end = w_start + kHrvWindowMs;
        while (lo < beats.size() && beats[lo].beat_ts < w_start) ++lo;
        std::size_t hi = lo;
        while (hi < beats.size() && beats[hi].beat_ts < w_end) ++hi;

        HrvWindow w;
        w.device_id = beats.front().device_id;
        w.window_start = w_start;
        w.window_end = w_end;
        w.n_beats = static_cast<int>(hi - lo);

        const bool enough_beats = w.n_beats >= std::max(min_beats, 2);
        const bool enough_span =
            enough_beats && beats[hi - 1].beat_ts - beats[lo].beat_ts >= 120'000 &&
            w.n_beats >= kMinBeatsPerWindow;
        if (enough_span) {
            std::vector<double> rr;
            rr.reserve(hi - lo);
            for (std::size_t i = lo; i < hi; ++i) rr.push_back(static_cast<double>(beats[i].rr_ms));

            HrvMetrics m;
            m.mean_hr_bpm = mean_hr(rr);
            m.sdnn_ms = sdnn(rr);
            m.rmssd_ms = rmssd(rr);
            BandPowers bands = band_powers(beats.subspan(lo, hi - lo), spectral);
            m.lf_power = bands.lf_ms2;
            m.hf_power = bands.hf_ms2;
            if (bands.hf_ms2 > 0) m.lf_hf = bands.lf_ms2 / bands.hf_ms2;
            if (bands.lf_ms2 + bands.hf_ms2 > 0) {
                m.lf_norm_pct = 100.0 * bands.lf_ms2 / (bands.lf_ms2 + bands.hf_ms2);
            }
            w.metrics = m;
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

NormalizedHrSeries normalized_hr_series(std::span<const ReconstructedBeat> beats,
                                        DurationMs cadence_ms) {
    if (beats.empty() || beats.back().beat_ts - beats.front().beat_ts < kHrvWindowMs) {
        throw Error(Errc::too_short_record, "need at least 300 s of beats");
    }
    if (cadence_ms <= 0) throw Error(Errc::invalid_hop, "cadence must be > 0");

    NormalizedHrSeries series;
    series.device_id = beats.front().device_id;
    series.window_s = static_cast<int>(kHrvWindowMs / 1000);

    const TimestampMs t0 = beats.front().beat_ts;
    const TimestampMs t_last = beats.back().beat_ts;

    std::vector<double> hr;
    std::size_t lo = 0, hi = 0;
    double rr_sum = 0;
    for (TimestampMs t = t0 + kHrvWindowMs; t <= t_last; t += cadence_ms) {
        // trailing window (t - 300 s, t]
        while (hi < beats.size() && beats[hi].beat_ts <= t) {
            rr_sum += static_cast<double>(beats[hi].rr_ms);
            ++hi;
        }
        while (lo < hi && beats[lo].beat_ts <= t - kHrvWindowMs) {
            rr_sum -= static_cast<double>(beats[lo].rr_ms);
            ++lo;
        }
        if (hi == lo) continue; // no beats in window; cannot happen with valid rr bounds
        const double mean_rr = rr_sum / static_cast<double>(hi - lo);
        series.samples.emplace_back(t, 60000.0 / mean_rr);
        hr.push_back(60000.0 / mean_rr);
    }

    std::vector<double> sorted = hr;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    series.median_bpm =
        n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    for (auto& [ts, value] : series.samples) value -= series.median_bpm;
    return series;
}

std::string hrv_windows_csv(std::span<const HrvWindow> windows) {
    std::ostringstream out;
    out << "device_id,window_start,window_end,n_beats,mean_hr_bpm,sdnn_ms,rmssd_ms,"
           "lf_hf,lf_norm_pct\n";
    char buf[64];
    auto cell = [&](std::optional<double> v) {
        out << ',';
        if (v) {
            std::snprintf(buf, sizeof(buf), "%.3f", *v);
            out << buf;
        }
    };
    for (const auto& w : windows) {
        out << w.device_id << ',' << w.window_start << ',' << w.window_end << ','
            << w.n_beats;
        if (w.metrics) {
            cell(w.metrics->mean_hr_bpm);
            cell(w.metrics->sdnn_ms);
            cell(w.metrics->rmssd_ms);
            cell(w.metrics->lf_hf);
            cell(w.metrics->lf_norm_pct);
        } else {
            out << ",,,,,";
        }
        out << '\n';
    }
    return out.str();
}

} // namespace banfusion
