/**
 * @file records.hpp
 * @brief Domain record types shared across the pipeline, plus their canonical
 *        JSONL encoding.
 *
 * Timestamps are epoch milliseconds (int64) on either the device clock or the
 * common clock, depending on where a record sits in the pipeline. The JSONL
 * encoding is canonical: alphabetically ordered keys, integer timestamps, one
 * record per line. Storage sizes and sync-batch accounting are defined in
 * terms of this encoding.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "banfusion/errors.hpp"

namespace banfusion {

using TimestampMs = std::int64_t;
using DurationMs = std::int64_t;

/// One R-R interval as received from a device, stamped at reception time
/// (device clock). rr_ms is bounded to the physiological range [200, 3000].
struct RrSample {
    std::string device_id;
    std::int64_t seq = 0;
    std::int64_t rr_ms = 0;
    TimestampMs reception_ts = 0;

    bool operator==(const RrSample&) const = default;
};

/// A beat with its true occurrence time recovered from the R-R chain.
struct ReconstructedBeat {
    std::string device_id;
    std::int64_t seq = 0;
    TimestampMs beat_ts = 0;
    std::int64_t rr_ms = 0;

    bool operator==(const ReconstructedBeat&) const = default;
};

/// One positioning fix. accuracy_m is the positioning system's own estimate;
/// values outside [4, 1200] m are treated as anomalous but not rejected.
struct GpsFix {
    std::string device_id;
    TimestampMs ts = 0;
    double lat_deg = 0;
    double lon_deg = 0;
    double accuracy_m = 0;

    bool operator==(const GpsFix&) const = default;
};

/// HRV metrics for one window. lf_hf / lf_norm_pct are absent when the
/// spectral denominator vanishes (constant rr).
struct HrvMetrics {
    double mean_hr_bpm = 0;
    double sdnn_ms = 0;
    double rmssd_ms = 0;
    double lf_power = 0;
    double hf_power = 0;
    std::optional<double> lf_hf;
    std::optional<double> lf_norm_pct;

    bool operator==(const HrvMetrics&) const = default;
};

/// One analysis window of one subject. metrics is absent when the window has
/// too few beats to be meaningful.
struct HrvWindow {
    std::string device_id;
    TimestampMs window_start = 0;
    TimestampMs window_end = 0;
    int n_beats = 0;
    std::optional<HrvMetrics> metrics;

    bool operator==(const HrvWindow&) const = default;
};

/// One sample of the median-normalized sliding heart-rate series.
struct NormalizedHrSample {
    std::string device_id;
    TimestampMs ts = 0;
    double hr_minus_median_bpm = 0;
    double median_bpm = 0;

    bool operator==(const NormalizedHrSample&) const = default;
};

/// Median-normalized HR series of one subject: HR averaged over a trailing
/// window (window_s) every 10 s, lowered by the series median.
struct NormalizedHrSeries {
    std::string device_id;
    std::vector<std::pair<TimestampMs, double>> samples;
    int window_s = 300;
    double median_bpm = 0;
};

/// Record kinds a device batches toward the central store.
using BatchRecord = std::variant<RrSample, GpsFix, HrvWindow>;

/// A device's accumulated records uploaded when connectivity allows.
struct SyncBatch {
    std::string device_id;
    std::vector<BatchRecord> records;
    std::int64_t size_bits = 0;
    TimestampMs covers_from = 0;
    TimestampMs covers_to = 0;
};

/// A time interval during which a set of subjects shares a spatial region.
struct ColocationEvent {
    std::set<std::string> subject_ids;
    TimestampMs start_ts = 0;
    TimestampMs end_ts = 0;
    double centroid_lat_deg = 0;
    double centroid_lon_deg = 0;
    double max_spread_m = 0;
};

/// An interval during which one subject is in directed motion.
struct MovementInterval {
    std::string device_id;
    TimestampMs start_ts = 0;
    TimestampMs end_ts = 0;
    double displacement_m = 0;
    double mean_speed_mps = 0;
};

enum class ActivityLabel { physical, cognitive, rest };

const char* activity_label_name(ActivityLabel label);
ActivityLabel activity_label_from_string(const std::string& name);

/// A labeled stretch of the merged multi-subject timeline, with the evidence
/// metrics that produced the label.
struct ActivitySegment {
    TimestampMs start_ts = 0;
    TimestampMs end_ts = 0;
    ActivityLabel label = ActivityLabel::rest;
    double group_elevation_bpm = 0;
    double dispersion_bpm = 0;
    bool moving = false;
    std::set<std::string> subject_ids;
};

/// Everything that can ride a topic.
using Payload = std::variant<RrSample, GpsFix, ReconstructedBeat, HrvWindow,
                             NormalizedHrSample, SyncBatch, ColocationEvent,
                             MovementInterval, ActivitySegment>;

enum class RecordKind {
    rr,
    gps,
    beat,
    hrv,
    hr_norm,
    sync_batch,
    colocation,
    movement,
    segment,
};

const char* record_kind_name(RecordKind kind);

/// Parses a kind name ("rr", "gps", "hrv", ...). Throws unknown_kind.
RecordKind record_kind_from_string(const std::string& name);

RecordKind kind_of(const Payload& payload);
RecordKind kind_of(const BatchRecord& record);

// Canonical JSONL encoding (alphabetical keys, integer timestamps).
nlohmann::json to_json(const RrSample& r);
nlohmann::json to_json(const GpsFix& r);
nlohmann::json to_json(const HrvWindow& r);
nlohmann::json to_json(const BatchRecord& r);

RrSample rr_from_json(const nlohmann::json& j);
GpsFix gps_from_json(const nlohmann::json& j);
HrvWindow hrv_from_json(const nlohmann::json& j);
BatchRecord batch_record_from_json(RecordKind kind, const nlohmann::json& j);

/// One canonical JSONL line (no trailing newline).
std::string encode_line(const BatchRecord& r);

/// Validates a batch record against its type invariants. Returns an error
/// message, or nullopt when the record is well-formed.
std::optional<std::string> validate(const BatchRecord& r);

/// Primary timestamp used for ordering and range queries
/// (rr: reception_ts, gps: ts, hrv: window_start).
TimestampMs primary_ts(const BatchRecord& r);

/// Dedup key within (device_id, kind): seq for rr, primary timestamp otherwise.
std::int64_t record_key(const BatchRecord& r);

const std::string& device_of(const BatchRecord& r);

} // namespace banfusion
