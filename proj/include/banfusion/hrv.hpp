/**
 * @file hrv.hpp
 * @brief Heart-rate-variability analytics: time-domain statistics, spectral
 *        band powers, 5-minute windowing, and the median-normalized sliding
 *        HR series used for multi-subject comparison.
 *
 * Spectral method: the rr-vs-time series is linearly interpolated, resampled
 * at 4 Hz, mean-removed, and fed through a Welch estimator (Hann window,
 * 128 s segments, 50% overlap). LF is the band integral over [0.04, 0.15) Hz
 * and HF over [0.15, 0.4) Hz, both in ms^2.
 */

#pragma once

#include <span>
#include <vector>

#include "banfusion/records.hpp"

namespace banfusion {

constexpr DurationMs kHrvWindowMs = 300'000;   // 5 minutes
constexpr int kMinBeatsPerWindow = 30;
constexpr DurationMs kNormalizedCadenceMs = 10'000;

/// Sample standard deviation (divisor N-1) of all R-R intervals, in ms.
/// Throws too_few_samples for length < 2.
double sdnn(std::span<const double> rr_ms);

/// Root mean square of successive R-R differences, in ms.
/// Throws too_few_samples for length < 2.
double rmssd(std::span<const double> rr_ms);

/// 60000 / mean(rr_ms), in beats per minute. Throws empty_input.
double mean_hr(std::span<const double> rr_ms);

struct BandPowers {
    double lf_ms2 = 0; // [0.04, 0.15) Hz
    double hf_ms2 = 0; // [0.15, 0.40) Hz
};

struct SpectralOptions {
    double resample_hz = 4.0;
    double segment_s = 128.0;
    double overlap = 0.5;
};

/// LF/HF band powers of a beat sequence. Requires a span of at least 120 s
/// and 30 beats; throws too_short_record.
BandPowers band_powers(std::span<const ReconstructedBeat> beats,
                       const SpectralOptions& options = {});

/// lf / hf. Throws zero_denominator when hf == 0.
double lf_hf_ratio(double lf, double hf);

/// 100 * lf / (lf + hf), percent. Throws zero_denominator when both are 0.
double lf_norm(double lf, double hf);

enum class WindowMode { tumbling, sliding };

/// Cuts a sorted beat sequence into 300 s windows (back-to-back in tumbling
/// mode, every hop_s in sliding mode) and computes the HRV parameter set per
/// window. Windows with fewer than min_beats, or too short a beat span for
/// the spectral estimate, are emitted with metrics absent.
/// Throws unsorted_input; invalid_hop for hop_s <= 0 in sliding mode.
std::vector<HrvWindow> compute_hrv_windows(std::span<const ReconstructedBeat> beats,
                                           WindowMode mode, double hop_s = 300.0,
                                           int min_beats = kMinBeatsPerWindow,
                                           const SpectralOptions& spectral = {});

/// HR averaged over the trailing 300 s window, every cadence_ms, lowered by
/// the series median. Requires beats spanning at least 300 s; throws
/// too_short_record.
NormalizedHrSeries normalized_hr_series(std::span<const ReconstructedBeat> beats,
                                        DurationMs cadence_ms = kNormalizedCadenceMs);

/// hrv.csv row set: header
/// device_id,window_start,window_end,n_beats,mean_hr_bpm,sdnn_ms,rmssd_ms,lf_hf,lf_norm_pct
/// with empty metric cells for windows without metrics.
std::string hrv_windows_csv(std::span<const HrvWindow> windows);

} // namespace banfusion
