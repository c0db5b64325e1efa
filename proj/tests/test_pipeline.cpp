#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "banfusion/pipeline.hpp"
#include "banfusion/scenario.hpp"

using namespace banfusion;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "banfusion_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::vector<std::string> segment_labels(const fs::path& csv) {
    std::vector<std::string> labels;
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string start, end, label;
        std::getline(row, start, ',');
        std::getline(row, end, ',');
        std::getline(row, label, ',');
        labels.push_back(label);
    }
    return labels;
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config round-trips through json and honors overrides") {
    PipelineConfig defaults;
    const auto j = to_json(defaults);
    const PipelineConfig parsed = config_from_json(j);
    CHECK(parsed.gap_tolerance_ms == defaults.gap_tolerance_ms);
    CHECK(parsed.activity.d_split_bpm == defaults.activity.d_split_bpm);
    CHECK(parsed.colocation.slice_ms == defaults.colocation.slice_ms);

    const auto override_json = nlohmann::json::parse(
        R"({"activity": {"e_act_bpm": 6.5}, "movement": {"window_s": 30}})");
    const PipelineConfig overridden = config_from_json(override_json);
    CHECK(overridden.activity.e_act_bpm == 6.5);
    CHECK(overridden.movement.window_s == 30.0);
    CHECK(overridden.activity.e_rest_bpm == defaults.activity.e_rest_bpm);

    // a missing config file means defaults
    const PipelineConfig from_missing = load_config("/nonexistent/config.json");
    CHECK(from_missing.activity.e_act_bpm == defaults.activity.e_act_bpm);
}

TEST_CASE("an empty data directory is a load error") {
    const auto dir = fresh_dir("empty_data");
    TopicBus bus;
    Pipeline pipeline(bus, PipelineConfig{});
    CHECK_THROWS_WITH_AS(pipeline.load(dir), doctest::Contains("no input streams"), Error);
}

TEST_CASE("the default scenario flows through every stage") {
    const auto data_dir = fresh_dir("flow_data");
    const auto out_dir = fresh_dir("flow_out");
    write_scenario(generate_scenario(ScenarioSpec::lunch(42)), data_dir);

    TopicBus bus;
    Pipeline pipeline(bus, PipelineConfig{});
    pipeline.load(data_dir);
    CHECK(pipeline.subjects().size() == 4);

    const RunSummary summary = pipeline.execute(out_dir);
    CHECK(summary.rr_records > 20'000);
    CHECK(summary.beats == summary.rr_records);
    CHECK(summary.skew.pass);
    CHECK(summary.hrv_windows == 60); // 15 tumbling windows x 4 subjects
    CHECK(summary.movement_intervals == 8);
    CHECK(summary.colocation_events == 1);
    CHECK(summary.segments == 3);
    CHECK_FALSE(summary.segmentation_skipped);

    for (const auto& name :
         {"hrv.csv", "hr_normalized.csv", "movement.csv", "colocation.geojson", "segments.csv"}) {
        CAPTURE(name);
        CHECK(fs::exists(out_dir / name));
    }
    CHECK(segment_labels(out_dir / "segments.csv") ==
          std::vector<std::string>{"physical", "cognitive", "rest"});

    // the store holds every ingested record plus the hrv windows
    Store store(out_dir / "store");
    CHECK(store.record_count() ==
          summary.rr_records + summary.gps_records + summary.hrv_windows);
}

TEST_CASE("a passive subscriber reconstructs the report bundle exactly") {
    const auto data_dir = fresh_dir("passive_data");
    const auto out_dir = fresh_dir("passive_out");
    const auto shadow_dir = fresh_dir("passive_shadow");
    write_scenario(generate_scenario(ScenarioSpec::lunch(5)), data_dir);

    TopicBus bus;
    Pipeline pipeline(bus, PipelineConfig{});
    pipeline.load(data_dir);

    // an outside observer, attached before the run, sees everything the
    // pipeline's own report writer sees
    ReportCollector shadow(bus, pipeline.subjects());
    pipeline.execute(out_dir);
    shadow.write(shadow_dir);

    for (const auto& name :
         {"hrv.csv", "hr_normalized.csv", "movement.csv", "colocation.geojson", "segments.csv"}) {
        CAPTURE(name);
        CHECK(slurp(out_dir / name) == slurp(shadow_dir / name));
    }
}

TEST_CASE("rerunning the pipeline on the same inputs is byte-identical and idempotent") {
    const auto data_dir = fresh_dir("rerun_data");
    const auto out_dir = fresh_dir("rerun_out");
    write_scenario(generate_scenario(ScenarioSpec::lunch(13)), data_dir);

    auto run_once = [&] {
        TopicBus bus;
        Pipeline pipeline(bus, PipelineConfig{});
        pipeline.load(data_dir);
        return pipeline.execute(out_dir);
    };
    const RunSummary first = run_once();
    CHECK(first.merged.duplicates == 0);
    std::map<std::string, std::string> bundle;
    for (const auto& name :
         {"hrv.csv", "hr_normalized.csv", "movement.csv", "colocation.geojson", "segments.csv"}) {
        bundle[name] = slurp(out_dir / name);
    }

    const RunSummary second = run_once();
    CHECK(second.merged.inserted == 0); // the store already has everything
    CHECK(second.merged.duplicates == first.merged.inserted);
    for (const auto& [name, content] : bundle) {
        CAPTURE(name);
        CHECK(slurp(out_dir / name) == content);
    }
}

TEST_CASE("a single-subject run skips segmentation but writes the bundle") {
    const auto data_dir = fresh_dir("single_data");
    const auto out_dir = fresh_dir("single_out");
    write_scenario(generate_scenario(ScenarioSpec::lunch(42, 1)), data_dir);

    TopicBus bus;
    Pipeline pipeline(bus, PipelineConfig{});
    pipeline.load(data_dir);
    const RunSummary summary = pipeline.execute(out_dir);
    CHECK(summary.segmentation_skipped);
    CHECK(slurp(out_dir / "segments.csv") ==
          "start,end,label,group_elevation_bpm,dispersion_bpm,moving\n");
    CHECK(fs::exists(out_dir / "hrv.csv"));
}

TEST_CASE("clock models beyond the skew budget abort the timesync stage") {
    const auto data_dir = fresh_dir("skew_data");
    write_scenario(generate_scenario(ScenarioSpec::lunch(42)), data_dir);
    {
        std::ofstream clocks(data_dir / "clocks.json");
        clocks << R"({"subject1": {"offset_ms": 9000},
                      "subject2": {"offset_ms": 0}, "subject3": {"offset_ms": 0},
                      "subject4": {"offset_ms": 0}})";
    }
    TopicBus bus;
    Pipeline pipeline(bus, PipelineConfig{});
    pipeline.load(data_dir);
    CHECK_THROWS_WITH_AS(pipeline.execute(fresh_dir("skew_out")),
                         doctest::Contains("stage timesync"), Error);
}

} // TEST_SUITE
