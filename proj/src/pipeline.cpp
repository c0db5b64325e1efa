#include "banfusion/pipeline.hpp"

#include <algorithm>
#include <fstream>

namespace banfusion {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out.is_open()) throw Error(Errc::io_error, "cannot write '" + path.string() + "'");
    return out;
}

} // namespace

PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig c;
    if (j.contains("gap_tolerance_ms")) c.gap_tolerance_ms = j["gap_tolerance_ms"];
    if (j.contains("skew_bound_ms")) c.skew_bound_ms = j["skew_bound_ms"];
    if (j.contains("hrv")) {
        const auto& h = j["hrv"];
        if (h.contains("mode")) {
            const std::string mode = h["mode"];
            if (mode == "tumbling") c.hrv_mode = WindowMode::tumbling;
            else if (mode == "sliding") c.hrv_mode = WindowMode::sliding;
            else throw Error(Errc::malformed_record, "hrv.mode must be tumbling or sliding");
        }
        if (h.contains("hop_s")) c.hrv_hop_s = h["hop_s"];
        if (h.contains("min_beats")) c.min_beats_per_window = h["min_beats"];
        if (h.contains("resample_hz")) c.spectral.resample_hz = h["resample_hz"];
        if (h.contains("welch_segment_s")) c.spectral.segment_s = h["welch_segment_s"];
        if (h.contains("welch_overlap")) c.spectral.overlap = h["welch_overlap"];
        if (h.contains("norm_cadence_s"))
            c.norm_cadence_ms = static_cast<DurationMs>(h["norm_cadence_s"].get<double>() * 1000);
    }
    if (j.contains("colocation")) {
        const auto& g = j["colocation"];
        if (g.contains("time_tol_s")) c.colocation.time_tol_s = g["time_tol_s"];
        if (g.contains("dist_tol_m")) c.colocation.dist_tol_m = g["dist_tol_m"];
        if (g.contains("slice_s"))
            c.colocation.slice_ms = static_cast<DurationMs>(g["slice_s"].get<double>() * 1000);
        if (g.contains("merge_gap_s"))
            c.colocation.merge_gap_ms =
                static_cast<DurationMs>(g["merge_gap_s"].get<double>() * 1000);
    }
    if (j.contains("movement")) {
        const auto& m = j["movement"];
        if (m.contains("window_s")) c.movement.window_s = m["window_s"];
        if (m.contains("speed_threshold_mps"))
            c.movement.speed_threshold_mps = m["speed_threshold_mps"];
    }
    if (j.contains("activity")) {
        const auto& a = j["activity"];
        if (a.contains("e_rest_bpm")) c.activity.e_rest_bpm = a["e_rest_bpm"];
        if (a.contains("e_act_bpm")) c.activity.e_act_bpm = a["e_act_bpm"];
        if (a.contains("d_split_bpm")) c.activity.d_split_bpm = a["d_split_bpm"];
        if (a.contains("slice_s"))
            c.activity.slice_ms = static_cast<DurationMs>(a["slice_s"].get<double>() * 1000);
    }
    if (j.contains("bus") && j["bus"].contains("high_water_mark")) {
        c.high_water_mark = j["bus"]["high_water_mark"];
    }
    return c;
}

nlohmann::json to_json(const PipelineConfig& c) {
    return {
        {"gap_tolerance_ms", c.gap_tolerance_ms},
        {"skew_bound_ms", c.skew_bound_ms},
        {"hrv",
         {{"mode", c.hrv_mode == WindowMode::tumbling ? "tumbling" : "sliding"},
          {"hop_s", c.hrv_hop_s},
          {"min_beats", c.min_beats_per_window},
          {"resample_hz", c.spectral.resample_hz},
          {"welch_segment_s", c.spectral.segment_s},
          {"welch_overlap", c.spectral.overlap},
          {"norm_cadence_s", static_cast<double>(c.norm_cadence_ms) / 1000.0}}},
        {"colocation",
         {{"time_tol_s", c.colocation.time_tol_s},
          {"dist_tol_m", c.colocation.dist_tol_m},
          {"slice_s", static_cast<double>(c.colocation.slice_ms) / 1000.0},
          {"merge_gap_s", static_cast<double>(c.colocation.merge_gap_ms) / 1000.0}}},
        {"movement",
         {{"window_s", c.movement.window_s},
          {"speed_threshold_mps", c.movement.speed_threshold_mps}}},
        {"activity",
         {{"e_rest_bpm", c.activity.e_rest_bpm},
          {"e_act_bpm", c.activity.e_act_bpm},
          {"d_split_bpm", c.activity.d_split_bpm},
          {"slice_s", static_cast<double>(c.activity.slice_ms) / 1000.0}}},
        {"bus", {{"high_water_mark", c.high_water_mark}}},
    };
}

PipelineConfig load_config(const std::filesystem::path& path) {
    if (path.empty() || !std::filesystem::exists(path)) return PipelineConfig{};
    std::ifstream in(path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw Error(Errc::malformed_record, "config '" + path.string() + "' is not valid JSON");
    }
    return config_from_json(j);
}

ReportCollector::ReportCollector(TopicBus& bus, const std::vector<std::string>& subjects) {
    for (const auto& s : subjects) {
        gps_subs_.push_back(bus.subscribe("aligned/gps/" + s, "report"));
        hrv_subs_.push_back(bus.subscribe("hrv/" + s, "report"));
        hrnorm_subs_.push_back(bus.subscribe("hrnorm/" + s, "report"));
        movement_subs_.push_back(bus.subscribe("movement/" + s, "report"));
    }
    colocation_sub_ = bus.subscribe("colocation/all", "report");
    segments_sub_ = bus.subscribe("segments/all", "report");
}

void ReportCollector::write(const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::io_error, "cannot create '" + out_dir.string() + "'");

    std::vector<HrvWindow> windows;
    for (const auto& sub : hrv_subs_) {
        for (auto& env : sub->drain()) windows.push_back(std::get<HrvWindow>(env.payload));
    }
    open_out(out_dir / "hrv.csv") << hrv_windows_csv(windows);

    std::vector<NormalizedHrSample> norm;
    for (const auto& sub : hrnorm_subs_) {
        for (auto& env : sub->drain()) norm.push_back(std::get<NormalizedHrSample>(env.payload));
    }
    open_out(out_dir / "hr_normalized.csv") << normalized_hr_csv(norm);

    std::vector<MovementInterval> movement;
    for (const auto& sub : movement_subs_) {
        for (auto& env : sub->drain()) {
            movement.push_back(std::get<MovementInterval>(env.payload));
        }
    }
    open_out(out_dir / "movement.csv") << movement_csv(movement);

    std::map<std::string, std::vector<GpsFix>> fixes;
    for (const auto& sub : gps_subs_) {
        for (auto& env : sub->drain()) {
            GpsFix fix = std::get<GpsFix>(env.payload);
            fixes[fix.device_id].push_back(std::move(fix));
        }
    }
    std::vector<ColocationEvent> events;
    for (auto& env : colocation_sub_->drain()) {
        events.push_back(std::get<ColocationEvent>(env.payload));
    }
    open_out(out_dir / "colocation.geojson") << geojson_export(fixes, events) << '\n';

    std::vector<ActivitySegment> segments;
    for (auto& env : segments_sub_->drain()) {
        segments.push_back(std::get<ActivitySegment>(env.payload));
    }
    open_out(out_dir / "segments.csv") << segments_csv(segments);
}

Pipeline::Pipeline(TopicBus& bus, PipelineConfig config) : bus_(bus), config_(std::move(config)) {}

void Pipeline::load(const std::filesystem::path& data_dir) {
    data_dir_ = data_dir;
    subjects_.clear();
    if (!std::filesystem::is_directory(data_dir)) {
        throw Error(Errc::io_error, "data dir '" + data_dir.string() + "' does not exist");
    }
    for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.ends_with(".rr.jsonl")) {
            subjects_.push_back(name.substr(0, name.size() - 9));
        }
    }
    std::sort(subjects_.begin(), subjects_.end());
    if (subjects_.empty()) throw Error(Errc::io_error, "no input streams");

    const auto clocks_path = data_dir / "clocks.json";
    clocks_.clear();
    if (std::filesystem::exists(clocks_path)) {
        std::ifstream in(clocks_path);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) {
            throw Error(Errc::malformed_record, "clocks.json is not valid JSON");
        }
        clocks_ = clock_models_from_json(j, config_.skew_bound_ms);
    }
    for (const auto& s : subjects_) {
        if (!clocks_.contains(s)) {
            clocks_[s] = ClockModel{s, 0, config_.skew_bound_ms};
        }
    }

    for (const auto& s : subjects_) {
        bus_.create_topic("rr/" + s, RecordKind::rr);
        bus_.create_topic("gps/" + s, RecordKind::gps);
        bus_.create_topic("sync/" + s, RecordKind::sync_batch);
        bus_.create_topic("aligned/rr/" + s, RecordKind::rr);
        bus_.create_topic("aligned/gps/" + s, RecordKind::gps);
        bus_.create_topic("beats/" + s, RecordKind::beat);
        bus_.create_topic("hrv/" + s, RecordKind::hrv);
        bus_.create_topic("hrnorm/" + s, RecordKind::hr_norm);
        bus_.create_topic("movement/" + s, RecordKind::movement);
    }
    bus_.create_topic("colocation/all", RecordKind::colocation);
    bus_.create_topic("segments/all", RecordKind::segment);
}

RunSummary Pipeline::execute(const std::filesystem::path& out_dir) {
    if (subjects_.empty()) throw Error(Errc::io_error, "no input streams");

    RunSummary summary;
    summary.subjects = subjects_;
    ReportCollector collector(bus_, subjects_);

    // ingest: raw device-clock streams onto topics, batches into the store
    std::map<std::string, DeviceLog> logs;
    stage("ingest", [&] {
        for (const auto& s : subjects_) {
            DeviceLog log;
            log.device_id = s;
            IngestStats stats;
            {
                std::ifstream in(data_dir_ / (s + ".rr.jsonl"));
                log.rr = read_rr_jsonl(in, &stats);
            }
            const auto gps_path = data_dir_ / (s + ".gps.jsonl");
            if (std::filesystem::exists(gps_path)) {
                std::ifstream in(gps_path);
                log.gps = read_gps_jsonl(in, &stats);
            }
            summary.rr_records += log.rr.size();
            summary.gps_records += log.gps.size();
            summary.anomalous_accuracy += stats.anomalous_accuracy;

            auto rr_pub = bus_.make_publisher("rr/" + s, "ingest/" + s);
            for (const auto& r : log.rr) rr_pub.publish(r);
            auto gps_pub = bus_.make_publisher("gps/" + s, "ingest/" + s);
            for (const auto& g : log.gps) gps_pub.publish(g);
            logs[s] = std::move(log);
        }
    });

    Store store(out_dir / "store", [] { return TimestampMs{0}; });
    stage("sync", [&] {
        for (const auto& s : subjects_) {
            SyncBatch batch = build_sync_batch(s, 0, logs[s]);
            const MergeResult merged = store.merge_batch(batch);
            summary.merged.inserted += merged.inserted;
            summary.merged.duplicates += merged.duplicates;
            bus_.make_publisher("sync/" + s, "sync/" + s).publish(std::move(batch));
        }
    });

    // timesync: skew gate, then map every stream onto the common clock
    std::map<std::string, std::vector<RrSample>> aligned_rr;
    std::map<std::string, std::vector<GpsFix>> aligned_gps;
    stage("timesync", [&] {
        std::vector<ClockModel> models;
        for (const auto& s : subjects_) models.push_back(clocks_.at(s));
        summary.skew = check_skew(models);
        if (!summary.skew.pass) {
            throw Error(Errc::invalid_model,
                        "pairwise clock gap " + std::to_string(summary.skew.max_gap_ms) +
                            " ms exceeds the skew budget");
        }
        for (const auto& s : subjects_) {
            const ClockModel& model = clocks_.at(s);
            auto rr = logs[s].rr;
            for (auto& r : rr) r.reception_ts = to_common_clock(r.reception_ts, model);
            auto gps = logs[s].gps;
            for (auto& g : gps) g.ts = to_common_clock(g.ts, model);

            auto rr_pub = bus_.make_publisher("aligned/rr/" + s, "timesync/" + s);
            for (const auto& r : rr) rr_pub.publish(r);
            auto gps_pub = bus_.make_publisher("aligned/gps/" + s, "timesync/" + s);
            for (const auto& g : gps) gps_pub.publish(g);
            aligned_rr[s] = std::move(rr);
            aligned_gps[s] = std::move(gps);
        }
    });

    std::map<std::string, std::vector<ReconstructedBeat>> beats;
    stage("reconstruction", [&] {
        for (const auto& s : subjects_) {
            auto b = reconstruct_beat_times(aligned_rr[s], config_.gap_tolerance_ms);
            summary.beats += b.size();
            auto pub = bus_.make_publisher("beats/" + s, "reconstruction/" + s);
            for (const auto& beat : b) pub.publish(beat);
            beats[s] = std::move(b);
        }
    });

    std::map<std::string, NormalizedHrSeries> series;
    stage("hrv", [&] {
        for (const auto& s : subjects_) {
            auto windows = compute_hrv_windows(beats[s], config_.hrv_mode, config_.hrv_hop_s,
                                               config_.min_beats_per_window, config_.spectral);
            summary.hrv_windows += windows.size();
            auto pub = bus_.make_publisher("hrv/" + s, "hrv/" + s);
            for (const auto& w : windows) pub.publish(w);

            SyncBatch hrv_batch;
            hrv_batch.device_id = s;
            for (const auto& w : windows) hrv_batch.records.emplace_back(w);
            store.merge_batch(hrv_batch);

            NormalizedHrSeries ns = normalized_hr_series(beats[s], config_.norm_cadence_ms);
            auto norm_pub = bus_.make_publisher("hrnorm/" + s, "hrv/" + s);
            for (const auto& [ts, value] : ns.samples) {
                norm_pub.publish(NormalizedHrSample{s, ts, value, ns.median_bpm});
            }
            series[s] = std::move(ns);
        }
    });

    std::vector<MovementInterval> all_movement;
    stage("geo", [&] {
        for (const auto& s : subjects_) {
            auto intervals = detect_movement(aligned_gps[s], config_.movement);
            summary.movement_intervals += intervals.size();
            auto pub = bus_.make_publisher("movement/" + s, "geo/" + s);
            for (const auto& m : intervals) pub.publish(m);
            all_movement.insert(all_movement.end(), intervals.begin(), intervals.end());
        }
        auto events = detect_colocation(aligned_gps, config_.colocation);
        summary.colocation_events = events.size();
        auto pub = bus_.make_publisher("colocation/all", "geo");
        for (const auto& ev : events) pub.publish(ev);
    });

    stage("segmentation", [&] {
        try {
            auto segments = classify_segments(series, all_movement, config_.activity);
            summary.segments = segments.size();
            auto pub = bus_.make_publisher("segments/all", "activity");
            for (const auto& seg : segments) pub.publish(seg);
        } catch (const Error& e) {
            if (e.code() != Errc::fewer_than_two_subjects) throw;
            summary.segmentation_skipped = true;
        }
    });

    stage("report", [&] { collector.write(out_dir); });
    return summary;
}

} // namespace banfusion
