/**
 * @file timesync.hpp
 * @brief Per-device clock models and mapping onto the common reference clock.
 *
 * Phones sync against a time server, which still leaves second-scale residual
 * offsets between any two of them. Fusion stays valid as long as every
 * pairwise gap is within the skew budget; check_skew enforces that.
 */

#pragma once

#include <map>
#include <string>
#include <vector>

#include "banfusion/records.hpp"

namespace banfusion {

constexpr DurationMs kDefaultSkewBoundMs = 2000;

struct ClockModel {
    std::string device_id;
    DurationMs offset_ms = 0; // device clock minus common clock
    DurationMs skew_bound_ms = kDefaultSkewBoundMs;

    bool valid() const { return offset_ms >= -skew_bound_ms && offset_ms <= skew_bound_ms; }
};

struct SkewReport {
    DurationMs max_gap_ms = 0;
    bool pass = true;
};

/// Standard two-way exchange estimator: local send t0, remote receive t1,
/// remote send t2, local receive t3. Returns the remote-minus-local offset,
/// ((t1 - t0) + (t2 - t3)) / 2. Exact when one-way delays are symmetric;
/// error is |d_out - d_in| / 2 otherwise. Throws non_monotonic_timestamps.
double estimate_offset(TimestampMs t0, TimestampMs t1, TimestampMs t2, TimestampMs t3);

/// Maps a device timestamp onto the common clock. Throws invalid_model when
/// the model's offset exceeds its skew bound.
TimestampMs to_common_clock(TimestampMs device_ts, const ClockModel& model);

/// Inverse of to_common_clock (round-trips exactly).
TimestampMs to_device_clock(TimestampMs common_ts, const ClockModel& model);

/// Pass iff every pairwise offset gap is within the combined skew bounds
/// (2 x skew_bound for uniform bounds). Throws empty_list.
SkewReport check_skew(const std::vector<ClockModel>& models);

/// Loads models from a JSON object keyed by device_id:
///   {"subject1": {"offset_ms": -734}, ...}
/// skew_bound_ms is optional per entry; default_bound applies otherwise.
std::map<std::string, ClockModel> clock_models_from_json(
    const nlohmann::json& j, DurationMs default_bound = kDefaultSkewBoundMs);

} // namespace banfusion
