#include "banfusion/records.hpp"

#include <array>

namespace banfusion {

namespace {

// Timestamps must be JSON integers; floating-point seconds would break the
// bit-exact round trip the storage layer guarantees.
std::int64_t require_int(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_number_integer()) {
        throw Error(Errc::malformed_record,
                    std::string("field '") + field + "' missing or not an integer");
    }
    return j.at(field).get<std::int64_t>();
}

double require_number(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_number()) {
        throw Error(Errc::malformed_record,
                    std::string("field '") + field + "' missing or not a number");
    }
    return j.at(field).get<double>();
}

std::string require_string(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_string()) {
        throw Error(Errc::malformed_record,
                    std::string("field '") + field + "' missing or not a string");
    }
    return j.at(field).get<std::string>();
}

} // namespace

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::duplicate_topic: return "duplicate-topic";
        case Errc::empty_name: return "empty-name";
        case Errc::unknown_topic: return "unknown-topic";
        case Errc::schema_mismatch: return "schema-mismatch";
        case Errc::unsorted_input: return "unsorted-input";
        case Errc::mixed_device: return "mixed-device";
        case Errc::non_positive_input: return "non-positive-input";
        case Errc::unknown_device: return "unknown-device";
        case Errc::non_monotonic_timestamps: return "non-monotonic-timestamps";
        case Errc::invalid_model: return "invalid-model";
        case Errc::empty_list: return "empty-list";
        case Errc::too_few_samples: return "too-few-samples";
        case Errc::too_short_record: return "too-short-record";
        case Errc::zero_denominator: return "zero-denominator";
        case Errc::empty_input: return "empty-input";
        case Errc::invalid_hop: return "invalid-hop";
        case Errc::out_of_range_coordinate: return "out-of-range-coordinate";
        case Errc::unsorted_fixes: return "unsorted-fixes";
        case Errc::missing_subject_coverage: return "missing-subject-coverage";
        case Errc::fewer_than_two_subjects: return "fewer-than-two-subjects";
        case Errc::insufficient_coverage: return "insufficient-coverage";
        case Errc::malformed_record: return "malformed-record";
        case Errc::unknown_kind: return "unknown-kind";
        case Errc::invalid_spec: return "invalid-spec";
        case Errc::io_error: return "io-error";
    }
    return "unknown-error";
}

const char* activity_label_name(ActivityLabel label) {
    switch (label) {
        case ActivityLabel::physical: return "physical";
        case ActivityLabel::cognitive: return "cognitive";
        case ActivityLabel::rest: return "rest";
    }
    return "rest";
}

ActivityLabel activity_label_from_string(const std::string& name) {
    if (name == "physical") return ActivityLabel::physical;
    if (name == "cognitive") return ActivityLabel::cognitive;
    if (name == "rest") return ActivityLabel::rest;
    throw Error(Errc::malformed_record, "unknown activity label '" + name + "'");
}

const char* record_kind_name(RecordKind kind) {
    switch (kind) {
        case RecordKind::rr: return "rr";
        case RecordKind::gps: return "gps";
        case RecordKind::beat: return "beat";
        case RecordKind::hrv: return "hrv";
        case RecordKind::hr_norm: return "hr_norm";
        case RecordKind::sync_batch: return "sync_batch";
        case RecordKind::colocation: return "colocation";
        case RecordKind::movement: return "movement";
        case RecordKind::segment: return "segment";
    }
    return "unknown";
}

RecordKind record_kind_from_string(const std::string& name) {
    static const std::array<RecordKind, 9> kinds = {
        RecordKind::rr,         RecordKind::gps,      RecordKind::beat,
        RecordKind::hrv,        RecordKind::hr_norm,  RecordKind::sync_batch,
        RecordKind::colocation, RecordKind::movement, RecordKind::segment,
    };
    for (RecordKind k : kinds) {
        if (name == record_kind_name(k)) return k;
    }
    throw Error(Errc::unknown_kind, "'" + name + "'");
}

RecordKind kind_of(const Payload& payload) {
    // Order must match the Payload variant.
    static constexpr std::array<RecordKind, 9> by_index = {
        RecordKind::rr,         RecordKind::gps,      RecordKind::beat,
        RecordKind::hrv,        RecordKind::hr_norm,  RecordKind::sync_batch,
        RecordKind::colocation, RecordKind::movement, RecordKind::segment,
    };
    return by_index.at(payload.index());
}

RecordKind kind_of(const BatchRecord& record) {
    static constexpr std::array<RecordKind, 3> by_index = {
        RecordKind::rr, RecordKind::gps, RecordKind::hrv};
    return by_index.at(record.index());
}

nlohmann::json to_json(const RrSample& r) {
    return {
        {"device_id", r.device_id},
        {"reception_ts", r.reception_ts},
        {"rr_ms", r.rr_ms},
        {"seq", r.seq},
    };
}

nlohmann::json to_json(const GpsFix& r) {
    return {
        {"accuracy_m", r.accuracy_m},
        {"device_id", r.device_id},
        {"lat_deg", r.lat_deg},
        {"lon_deg", r.lon_deg},
        {"ts", r.ts},
    };
}

nlohmann::json to_json(const HrvWindow& r) {
    nlohmann::json j = {
        {"device_id", r.device_id},
        {"n_beats", r.n_beats},
        {"window_end", r.window_end},
        {"window_start", r.window_start},
    };
    if (r.metrics) {
        j["mean_hr_bpm"] = r.metrics->mean_hr_bpm;
        j["sdnn_ms"] = r.metrics->sdnn_ms;
        j["rmssd_ms"] = r.metrics->rmssd_ms;
        j["lf_power"] = r.metrics->lf_power;
        j["hf_power"] = r.metrics->hf_power;
        if (r.metrics->lf_hf) j["lf_hf"] = *r.metrics->lf_hf;
        if (r.metrics->lf_norm_pct) j["lf_norm_pct"] = *r.metrics->lf_norm_pct;
    }
    return j;
}

nlohmann::json to_json(const BatchRecord& r) {
    return std::visit([](const auto& rec) { return to_json(rec); }, r);
}

RrSample rr_from_json(const nlohmann::json& j) {
    RrSample r;
    r.device_id = require_string(j, "device_id");
    r.seq = require_int(j, "seq");
    r.rr_ms = require_int(j, "rr_ms");
    r.reception_ts = require_int(j, "reception_ts");
    return r;
}

GpsFix gps_from_json(const nlohmann::json& j) {
    GpsFix r;
    r.device_id = require_string(j, "device_id");
    r.ts = require_int(j, "ts");
    r.lat_deg = require_number(j, "lat_deg");
    r.lon_deg = require_number(j, "lon_deg");
    r.accuracy_m = require_number(j, "accuracy_m");
    return r;
}

HrvWindow hrv_from_json(const nlohmann::json& j) {
    HrvWindow r;
    r.device_id = require_string(j, "device_id");
    r.window_start = require_int(j, "window_start");
    r.window_end = require_int(j, "window_end");
    r.n_beats = static_cast<int>(require_int(j, "n_beats"));
    if (j.contains("mean_hr_bpm")) {
        HrvMetrics m;
        m.mean_hr_bpm = require_number(j, "mean_hr_bpm");
        m.sdnn_ms = require_number(j, "sdnn_ms");
        m.rmssd_ms = require_number(j, "rmssd_ms");
        m.lf_power = require_number(j, "lf_power");
        m.hf_power = require_number(j, "hf_power");
        if (j.contains("lf_hf")) m.lf_hf = require_number(j, "lf_hf");
        if (j.contains("lf_norm_pct")) m.lf_norm_pct = require_number(j, "lf_norm_pct");
        r.metrics = m;
    }
    return r;
}

BatchRecord batch_record_from_json(RecordKind kind, const nlohmann::json& j) {
    switch (kind) {
        case RecordKind::rr: return rr_from_json(j);
        case RecordKind::gps: return gps_from_json(j);
        case RecordKind::hrv: return hrv_from_json(j);
        default:
            throw Error(Errc::unknown_kind,
                        std::string(record_kind_name(kind)) + " is not a batchable kind");
    }
}

std::string encode_line(const BatchRecord& r) {
    return to_json(r).dump();
}

std::optional<std::string> validate(const BatchRecord& r) {
    if (device_of(r).empty()) return "empty device_id";
    if (const auto* rr = std::get_if<RrSample>(&r)) {
        if (rr->seq < 0) return "negative seq";
        if (rr->rr_ms < 200 || rr->rr_ms > 3000) {
            return "rr_ms " + std::to_string(rr->rr_ms) + " outside [200, 3000]";
        }
    } else if (const auto* fix = std::get_if<GpsFix>(&r)) {
        if (fix->lat_deg < -90.0 || fix->lat_deg > 90.0) return "lat_deg out of range";
        if (fix->lon_deg < -180.0 || fix->lon_deg > 180.0) return "lon_deg out of range";
        if (!(fix->accuracy_m > 0)) return "accuracy_m must be > 0";
    } else if (const auto* w = std::get_if<HrvWindow>(&r)) {
        if (w->window_end <= w->window_start) return "empty window";
        if (w->n_beats < 0) return "negative n_beats";
        if (w->metrics && (w->metrics->sdnn_ms < 0 || w->metrics->rmssd_ms < 0 ||
                           w->metrics->lf_power < 0 || w->metrics->hf_power < 0)) {
            return "negative HRV metric";
        }
    }
    return std::nullopt;
}

TimestampMs primary_ts(const BatchRecord& r) {
    return std::visit(
        [](const auto& rec) -> TimestampMs {
            using T = std::decay_t<decltype(rec)>;
            if constexpr (std::is_same_v<T, RrSample>) {
                return rec.reception_ts;
            } else if constexpr (std::is_same_v<T, GpsFix>) {
                return rec.ts;
            } else {
                return rec.window_start;
            }
        },
        r);
}

std::int64_t record_key(const BatchRecord& r) {
    if (const auto* rr = std::get_if<RrSample>(&r)) return rr->seq;
    return primary_ts(r);
}

const std::string& device_of(const BatchRecord& r) {
    return std::visit([](const auto& rec) -> const std::string& { return rec.device_id; }, r);
}

} // namespace banfusion
