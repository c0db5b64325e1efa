#include "banfusion/ban_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace banfusion {

namespace {

// Anchor a run so the mean residual (beat_ts - reception_ts) is zero, up to
// rounding onto the ms grid. beat_ts[k] = anchor + cum[k].
void emit_run(const std::vector<RrSample>& samples, std::size_t begin, std::size_t end,
              std::vector<ReconstructedBeat>& out) {
    std::vector<std::int64_t> cum(end - begin);
    std::int64_t running = 0;
    for (std::size_t k = begin; k < end; ++k) {
        running += samples[k].rr_ms;
        cum[k - begin] = running;
    }
    double anchor_sum = 0;
    for (std::size_t k = begin; k < end; ++k) {
        anchor_sum += static_cast<double>(samples[k].reception_ts - cum[k - begin]);
    }
    auto anchor = static_cast<std::int64_t>(
        std::llround(anchor_sum / static_cast<double>(end - begin)));
    for (std::size_t k = begin; k < end; ++k) {
        out.push_back(ReconstructedBeat{samples[k].device_id, samples[k].seq,
                                        anchor + cum[k - begin], samples[k].rr_ms});
    }
}

} // namespace

std::vector<ReconstructedBeat> reconstruct_beat_times(const std::vector<RrSample>& samples,
                                                      DurationMs gap_tolerance_ms) {
    std::vector<ReconstructedBeat> out;
    if (samples.empty()) return out;
    out.reserve(samples.size());

    const std::string& device = samples.front().device_id;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        if (samples[k].device_id != device) {
            throw Error(Errc::mixed_device,
                        "expected '" + device + "', got '" + samples[k].device_id + "'");
        }
        if (samples[k].seq <= samples[k - 1].seq ||
            samples[k].reception_ts <= samples[k - 1].reception_ts) {
            throw Error(Errc::unsorted_input,
                        "samples must be sorted by strictly increasing seq and reception_ts");
        }
    }

    std::size_t run_begin = 0;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        DurationMs reception_gap = samples[k].reception_ts - samples[k - 1].reception_ts;
        if (std::llabs(reception_gap - samples[k].rr_ms) > gap_tolerance_ms) {
            emit_run(samples, run_begin, k, out);
            run_begin = k;
        }
    }
    emit_run(samples, run_begin, samples.size(), out);
    return out;
}

double data_rate_estimate(double bytes_per_sample, double hr_bpm) {
    if (!(bytes_per_sample > 0) || !(hr_bpm > 0)) {
        throw Error(Errc::non_positive_input, "bytes_per_sample and hr_bpm must be > 0");
    }
    return bytes_per_sample * 8.0 * hr_bpm / 60.0;
}

double estimate_sync_duration(double data_bits, double link_rate_bits_per_s) {
    if (!(data_bits > 0) || !(link_rate_bits_per_s > 0)) {
        throw Error(Errc::non_positive_input, "data_bits and link rate must be > 0");
    }
    return data_bits / link_rate_bits_per_s;
}

SyncBatch build_sync_batch(const std::string& device_id, TimestampMs records_since,
                           const DeviceLog& log) {
    if (log.device_id != device_id) {
        throw Error(Errc::unknown_device,
                    "log belongs to '" + log.device_id + "', not '" + device_id + "'");
    }
    SyncBatch batch;
    batch.device_id = device_id;
    batch.covers_from = records_since;
    batch.covers_to = records_since;

    auto add = [&](BatchRecord record) {
        TimestampMs ts = primary_ts(record);
        if (ts <= records_since) return;
        batch.covers_to = std::max(batch.covers_to, ts);
        batch.size_bits += static_cast<std::int64_t>(encode_line(record).size()) * 8;
        batch.records.push_back(std::move(record));
    };

    // Ordering contract: rr by seq, then gps by ts, then hrv by window start.
    for (const auto& r : log.rr) add(r);
    for (const auto& g : log.gps) add(g);
    for (const auto& w : log.hrv) add(w);
    return batch;
}

namespace {

nlohmann::json parse_line(const std::string& line, std::size_t line_no) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
        throw Error(Errc::malformed_record, "invalid JSON at line " + std::to_string(line_no));
    }
    return j;
}

} // namespace

std::vector<RrSample> read_rr_jsonl(std::istream& in, IngestStats* stats) {
    std::vector<RrSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        RrSample s = rr_from_json(parse_line(line, line_no));
        if (auto msg = validate(BatchRecord{s})) {
            throw Error(Errc::malformed_record, *msg + " at line " + std::to_string(line_no));
        }
        if (!samples.empty()) {
            if (s.device_id != samples.front().device_id) {
                throw Error(Errc::mixed_device, "stream mixes devices at line " +
                                                    std::to_string(line_no));
            }
            if (s.seq <= samples.back().seq || s.reception_ts <= samples.back().reception_ts) {
                throw Error(Errc::unsorted_input, "stream not sorted at line " +
                                                      std::to_string(line_no));
            }
        }
        if (stats) ++stats->records;
        samples.push_back(std::move(s));
    }
    return samples;
}

std::vector<GpsFix> read_gps_jsonl(std::istream& in, IngestStats* stats) {
    std::vector<GpsFix> fixes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        GpsFix f = gps_from_json(parse_line(line, line_no));
        if (auto msg = validate(BatchRecord{f})) {
            throw Error(Errc::malformed_record, *msg + " at line " + std::to_string(line_no));
        }
        if (!fixes.empty()) {
            if (f.device_id != fixes.front().device_id) {
                throw Error(Errc::mixed_device, "stream mixes devices at line " +
                                                    std::to_string(line_no));
            }
            if (f.ts < fixes.back().ts) {
                throw Error(Errc::unsorted_input, "stream not sorted at line " +
                                                      std::to_string(line_no));
            }
        }
        if (stats) {
            ++stats->records;
            if (f.accuracy_m < 4.0 || f.accuracy_m > 1200.0) ++stats->anomalous_accuracy;
        }
        fixes.push_back(std::move(f));
    }
    return fixes;
}

void write_rr_jsonl(std::ostream& out, const std::vector<RrSample>& samples) {
    for (const auto& s : samples) out << encode_line(BatchRecord{s}) << '\n';
}

void write_gps_jsonl(std::ostream& out, const std::vector<GpsFix>& fixes) {
    for (const auto& f : fixes) out << encode_line(BatchRecord{f}) << '\n';
}

} // namespace banfusion
