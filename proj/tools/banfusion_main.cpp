/**
 * @file banfusion_main.cpp
 * @brief banfusion CLI: generate synthetic scenarios, replay them through the
 *        fusion pipeline, and summarize report bundles.
 *
 * Exit codes: 0 success, 1 input error, 2 pipeline failure.
 */

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "banfusion/pipeline.hpp"
#include "banfusion/scenario.hpp"

namespace fs = std::filesystem;
using namespace banfusion;

namespace {

int cmd_simulate(const std::string& data_dir, const std::string& scenario, std::uint64_t seed,
                 int subjects) {
    ScenarioSpec spec;
    if (scenario == "lunch") {
        spec = ScenarioSpec::lunch(seed, subjects);
    } else {
        std::cerr << "unknown scenario '" << scenario << "' (available: lunch)\n";
        return 1;
    }
    ScenarioData data = generate_scenario(spec);
    write_scenario(data, data_dir);
    std::cout << "scenario '" << spec.name << "' seed " << seed << ": " << spec.subjects
              << " subjects, " << data.truth.phases.size() << " phases -> " << data_dir << "\n";
    return 0;
}

int cmd_run(const std::string& data_dir, const std::string& out_dir,
            const std::string& config_path) {
    PipelineConfig config;
    try {
        config = load_config(config_path);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    TopicBus bus(TopicBus::Options{.high_water_mark = config.high_water_mark, .clock = {}});
    Pipeline pipeline(bus, config);
    try {
        pipeline.load(data_dir);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        const RunSummary summary = pipeline.execute(out_dir);
        std::cout << "subjects: " << summary.subjects.size() << "\n"
                  << "rr records: " << summary.rr_records << " (beats reconstructed: "
                  << summary.beats << ")\n"
                  << "gps records: " << summary.gps_records << " (anomalous accuracy: "
                  << summary.anomalous_accuracy << ")\n"
                  << "clock skew: max gap " << summary.skew.max_gap_ms << " ms, "
                  << (summary.skew.pass ? "pass" : "fail") << "\n"
                  << "store: " << summary.merged.inserted << " inserted, "
                  << summary.merged.duplicates << " duplicates\n"
                  << "hrv windows: " << summary.hrv_windows << "\n"
                  << "movement intervals: " << summary.movement_intervals << "\n"
                  << "colocation events: " << summary.colocation_events << "\n";
        if (summary.segmentation_skipped) {
            std::cout << "segments: skipped (fewer than two subjects)\n";
        } else {
            std::cout << "segments: " << summary.segments << "\n";
        }
        std::cout << "reports -> " << out_dir << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}

int cmd_report(const std::string& out_dir) {
    const fs::path segments_path = fs::path(out_dir) / "segments.csv";
    const fs::path hrv_path = fs::path(out_dir) / "hrv.csv";
    if (!fs::exists(segments_path) || !fs::exists(hrv_path)) {
        std::cerr << "report bundle not found under " << out_dir << "\n";
        return 1;
    }

    std::ifstream segments(segments_path);
    std::string line;
    std::getline(segments, line); // header
    std::cout << "activity segments:\n";
    while (std::getline(segments, line)) {
        std::istringstream row(line);
        std::string start, end, label, elevation, dispersion, moving;
        std::getline(row, start, ',');
        std::getline(row, end, ',');
        std::getline(row, label, ',');
        std::getline(row, elevation, ',');
        std::getline(row, dispersion, ',');
        std::getline(row, moving, ',');
        const double minutes =
            (std::stoll(end) - std::stoll(start)) / 60000.0;
        std::cout << "  " << label << "  " << minutes << " min  (elevation " << elevation
                  << " bpm, dispersion " << dispersion << " bpm, moving " << moving << ")\n";
    }

    std::ifstream hrv(hrv_path);
    std::getline(hrv, line); // header
    std::map<std::string, std::pair<int, int>> windows_by_subject; // total, with metrics
    while (std::getline(hrv, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        auto& [total, with_metrics] = windows_by_subject[line.substr(0, comma)];
        ++total;
        // metric cells are empty for sparse windows
        if (line.find(",,") == std::string::npos) ++with_metrics;
    }
    std::cout << "hrv windows:\n";
    for (const auto& [subject, counts] : windows_by_subject) {
        std::cout << "  " << subject << ": " << counts.first << " windows, " << counts.second
                  << " with metrics\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-subject telemetry fusion: simulate, run, report"};
    app.require_subcommand(1);

    std::string data_dir = "data";
    std::string out_dir;
    std::string config_path;
    std::string scenario = "lunch";
    std::uint64_t seed = 42;
    int subjects = 4;

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic scenario");
    simulate->add_option("--data-dir", data_dir, "output directory for the streams");
    simulate->add_option("--scenario", scenario, "scenario name (lunch)");
    simulate->add_option("--seed", seed, "random seed");
    simulate->add_option("--subjects", subjects, "number of subjects");

    auto* run = app.add_subcommand("run", "run the fusion pipeline over a data directory");
    run->add_option("--data-dir", data_dir, "directory with <subject>.rr.jsonl streams");
    run->add_option("--out", out_dir, "report directory (default <data-dir>/reports)");
    run->add_option("--config", config_path, "JSON config with pipeline tunables");

    auto* report = app.add_subcommand("report", "summarize a report bundle");
    report->add_option("--out", out_dir, "report directory (default <data-dir>/reports)");
    report->add_option("--data-dir", data_dir, "data directory (used to locate reports)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(data_dir, scenario, seed, subjects);
        if (run->parsed()) {
            if (out_dir.empty()) out_dir = (fs::path(data_dir) / "reports").string();
            return cmd_run(data_dir, out_dir, config_path);
        }
        if (out_dir.empty()) out_dir = (fs::path(data_dir) / "reports").string();
        return cmd_report(out_dir);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
