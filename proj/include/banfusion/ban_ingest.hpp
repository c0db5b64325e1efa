/**
 * @file ban_ingest.hpp
 * @brief Phone-side ingest: beat-time reconstruction from reception-stamped
 *        R-R intervals, link throughput estimates, and store-and-forward sync
 *        batches.
 *
 * R-R samples are stamped when the phone receives them, so the gap between
 * two reception stamps is not the R-R interval itself. reconstruct_beat_times
 * rebuilds true beat timestamps by chaining intervals and anchoring each
 * contiguous run so that reconstruction is unbiased against the reception
 * stamps.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "banfusion/records.hpp"

namespace banfusion {

/// Reception gaps that disagree with the R-R chain by more than this start a
/// new run: BLE notification jitter is tens of ms, while a dropped packet
/// shifts reception by at least one full interval.
constexpr DurationMs kDefaultGapToleranceMs = 500;

/// Rebuilds beat timestamps from reception-stamped samples.
///
/// Samples are partitioned into contiguous runs; a run breaks when
/// |(reception_ts[k+1] - reception_ts[k]) - rr_ms[k+1]| > gap_tolerance_ms.
/// Within a run, beat_ts[k] = anchor + sum(rr_ms[0..k]), with the anchor
/// chosen so that mean(beat_ts - reception_ts) is zero over the run (least-
/// squares offset, rounded to the ms grid). Inter-beat gaps inside a run
/// equal the R-R intervals exactly.
///
/// Requires samples sorted by strictly increasing seq and a single device;
/// throws unsorted_input / mixed_device.
std::vector<ReconstructedBeat> reconstruct_beat_times(
    const std::vector<RrSample>& samples, DurationMs gap_tolerance_ms = kDefaultGapToleranceMs);

/// Cardiac stream rate in bits/s: bytes_per_sample * 8 * hr_bpm / 60.
/// Throws non_positive_input.
double data_rate_estimate(double bytes_per_sample, double hr_bpm);

/// Transfer time in seconds for data_bits over a link of link_rate_bits_per_s.
/// Throws non_positive_input.
double estimate_sync_duration(double data_bits, double link_rate_bits_per_s);

/// A device's full record log, as read from its JSONL streams.
struct DeviceLog {
    std::string device_id;
    std::vector<RrSample> rr;
    std::vector<GpsFix> gps;
    std::vector<HrvWindow> hrv;
};

/// Collects the device's records newer than records_since into a batch,
/// ordered rr-by-seq, then gps-by-ts, then hrv-by-window_start. size_bits is
/// the canonical JSONL encoding length times 8. Throws unknown_device when
/// the log belongs to a different device.
SyncBatch build_sync_batch(const std::string& device_id, TimestampMs records_since,
                           const DeviceLog& log);

/// Per-stream ingest statistics (anomalous accuracies are logged, not dropped).
struct IngestStats {
    std::size_t records = 0;
    std::size_t anomalous_accuracy = 0;
};

/// Reads one canonical JSONL stream. Enforces per-device sequencing for rr
/// (reception_ts strictly increasing with seq) and sorted ts for gps; throws
/// unsorted_input / mixed_device / malformed_record.
std::vector<RrSample> read_rr_jsonl(std::istream& in, IngestStats* stats = nullptr);
std::vector<GpsFix> read_gps_jsonl(std::istream& in, IngestStats* stats = nullptr);

void write_rr_jsonl(std::ostream& out, const std::vector<RrSample>& samples);
void write_gps_jsonl(std::ostream& out, const std::vector<GpsFix>& fixes);

} // namespace banfusion
