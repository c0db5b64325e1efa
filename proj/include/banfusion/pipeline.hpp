/**
 * @file pipeline.hpp
 * @brief End-to-end composition: ingest -> timesync -> reconstruction -> HRV
 *        -> geo -> segmentation, with every stage's output published on a
 *        topic and reports assembled by a bus subscriber.
 *
 * Topic layout ("kind/subject-id" convention):
 *   rr/<s>, gps/<s>          raw streams on the device clock
 *   sync/<s>                 store-and-forward batches
 *   aligned/rr/<s>, aligned/gps/<s>   common-clock streams
 *   beats/<s>                reconstructed beat times
 *   hrv/<s>, hrnorm/<s>      HRV windows and normalized-HR samples
 *   movement/<s>             movement intervals
 *   colocation/all           co-location events
 *   segments/all             activity segments
 *
 * The report bundle (hrv.csv, hr_normalized.csv, movement.csv,
 * colocation.geojson, segments.csv) is written by a ReportCollector that only
 * sees topic traffic, so any passive subscriber can reproduce it exactly.
 */

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "banfusion/activity.hpp"
#include "banfusion/ban_ingest.hpp"
#include "banfusion/geo.hpp"
#include "banfusion/hrv.hpp"
#include "banfusion/storage.hpp"
#include "banfusion/timesync.hpp"
#include "banfusion/topic_bus.hpp"

namespace banfusion {

/// Every tunable named by the analysis modules, loadable from one JSON file.
struct PipelineConfig {
    DurationMs gap_tolerance_ms = kDefaultGapToleranceMs;
    DurationMs skew_bound_ms = kDefaultSkewBoundMs;
    WindowMode hrv_mode = WindowMode::tumbling;
    double hrv_hop_s = 300.0;
    int min_beats_per_window = kMinBeatsPerWindow;
    SpectralOptions spectral;
    DurationMs norm_cadence_ms = kNormalizedCadenceMs;
    ColocationParams colocation;
    MovementParams movement;
    ActivityParams activity;
    std::size_t high_water_mark = 100'000;
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& config);

/// Reads a config file; missing file yields defaults, malformed JSON throws.
PipelineConfig load_config(const std::filesystem::path& path);

/// Assembles the report bundle from topic traffic alone.
class ReportCollector {
public:
    ReportCollector(TopicBus& bus, const std::vector<std::string>& subjects);

    /// Drains all subscriptions and writes the five report files.
    void write(const std::filesystem::path& out_dir);

private:
    std::vector<SubscriberPtr> gps_subs_;
    std::vector<SubscriberPtr> hrv_subs_;
    std::vector<SubscriberPtr> hrnorm_subs_;
    std::vector<SubscriberPtr> movement_subs_;
    SubscriberPtr colocation_sub_;
    SubscriberPtr segments_sub_;
};

struct RunSummary {
    std::vector<std::string> subjects;
    std::size_t rr_records = 0;
    std::size_t gps_records = 0;
    std::size_t anomalous_accuracy = 0;
    std::size_t beats = 0;
    std::size_t hrv_windows = 0;
    std::size_t movement_intervals = 0;
    std::size_t colocation_events = 0;
    std::size_t segments = 0;
    SkewReport skew;
    MergeResult merged;
    bool segmentation_skipped = false; // fewer than two subjects
};

class Pipeline {
public:
    Pipeline(TopicBus& bus, PipelineConfig config);

    /// Scans data_dir for <subject>.rr.jsonl streams, loads clock models from
    /// clocks.json (identity when absent), and creates all topics. Throws
    /// io_error("no input streams") on an empty directory.
    void load(const std::filesystem::path& data_dir);

    const std::vector<std::string>& subjects() const { return subjects_; }

    /// Runs all stages, persisting into out_dir/store and writing the report
    /// bundle into out_dir. Errors carry a stage-identifying message.
    RunSummary execute(const std::filesystem::path& out_dir);

private:
    TopicBus& bus_;
    PipelineConfig config_;
    std::filesystem::path data_dir_;
    std::vector<std::string> subjects_;
    std::map<std::string, ClockModel> clocks_;
};

} // namespace banfusion
