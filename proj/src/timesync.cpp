#include "banfusion/timesync.hpp"

#include <cmath>
#include <cstdlib>

namespace banfusion {

double estimate_offset(TimestampMs t0, TimestampMs t1, TimestampMs t2, TimestampMs t3) {
    if (t3 < t0) throw Error(Errc::non_monotonic_timestamps, "t3 precedes t0 on the local clock");
    if (t2 < t1) throw Error(Errc::non_monotonic_timestamps, "t2 precedes t1 on the remote clock");
    return (static_cast<double>(t1 - t0) + static_cast<double>(t2 - t3)) / 2.0;
}

TimestampMs to_common_clock(TimestampMs device_ts, const ClockModel& model) {
    if (!model.valid()) {
        throw Error(Errc::invalid_model,
                    model.device_id + " offset " + std::to_string(model.offset_ms) +
                        " ms exceeds skew bound " + std::to_string(model.skew_bound_ms) + " ms");
    }
    return device_ts - model.offset_ms;
}

TimestampMs to_device_clock(TimestampMs common_ts, const ClockModel& model) {
    if (!model.valid()) {
        throw Error(Errc::invalid_model,
                    model.device_id + " offset " + std::to_string(model.offset_ms) +
                        " ms exceeds skew bound " + std::to_string(model.skew_bound_ms) + " ms");
    }
    return common_ts + model.offset_ms;
}

SkewReport check_skew(const std::vector<ClockModel>& models) {
    if (models.empty()) throw Error(Errc::empty_list, "need at least one clock model");
    SkewReport report;
    for (std::size_t i = 0; i < models.size(); ++i) {
        for (std::size_t j = i + 1; j < models.size(); ++j) {
            DurationMs gap = std::llabs(models[i].offset_ms - models[j].offset_ms);
            report.max_gap_ms = std::max(report.max_gap_ms, gap);
            if (gap > models[i].skew_bound_ms + models[j].skew_bound_ms) report.pass = false;
        }
    }
    return report;
}

std::map<std::string, ClockModel> clock_models_from_json(const nlohmann::json& j,
                                                         DurationMs default_bound) {
    if (!j.is_object()) throw Error(Errc::malformed_record, "clock config must be a JSON object");
    std::map<std::string, ClockModel> models;
    for (const auto& [device_id, entry] : j.items()) {
        ClockModel model;
        model.device_id = device_id;
        model.skew_bound_ms = default_bound;
        if (entry.is_number_integer()) {
            model.offset_ms = entry.get<std::int64_t>();
        } else if (entry.is_object()) {
            if (!entry.contains("offset_ms") || !entry["offset_ms"].is_number_integer()) {
                throw Error(Errc::malformed_record,
                            "clock entry for '" + device_id + "' lacks integer offset_ms");
            }
            model.offset_ms = entry["offset_ms"].get<std::int64_t>();
            if (entry.contains("skew_bound_ms")) {
                model.skew_bound_ms = entry["skew_bound_ms"].get<std::int64_t>();
            }
        } else {
            throw Error(Errc::malformed_record, "clock entry for '" + device_id + "' malformed");
        }
        models[device_id] = model;
    }
    return models;
}

} // namespace banfusion
