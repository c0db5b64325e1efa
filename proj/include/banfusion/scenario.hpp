/**
 * @file scenario.hpp
 * @brief Deterministic synthetic-scenario generator: per-subject R-R and GPS
 *        streams on drifting device clocks, plus the ground truth needed to
 *        score the pipeline against it.
 *
 * The default "lunch" scenario follows the three-activity storyline: a social
 * physical activity (a 200 m walk to the restaurant and the walk back), a
 * social cognitive activity (playing cards, which stresses players unevenly),
 * and a rest period at the desk. Streams are a pure function of the seed.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "banfusion/activity.hpp"
#include "banfusion/records.hpp"
#include "banfusion/timesync.hpp"

namespace banfusion {

struct PhaseSpec {
    ActivityLabel label = ActivityLabel::rest;
    std::int64_t duration_s = 0;
};

struct ScenarioSpec {
    std::string name;
    int subjects = 4;
    std::vector<PhaseSpec> phases;
    std::uint64_t seed = 42;

    /// The default three-activity storyline.
    static ScenarioSpec lunch(std::uint64_t seed = 42, int subjects = 4);
};

struct GroundTruthPhase {
    ActivityLabel label = ActivityLabel::rest;
    TimestampMs start_ts = 0;
    TimestampMs end_ts = 0;
};

struct GroundTruth {
    TimestampMs t0_ms = 0;
    std::vector<GroundTruthPhase> phases;
    std::vector<TimeWindow> walks;   // common to the group
    std::set<std::string> stressed;  // subjects carrying the cognitive load
};

struct ScenarioData {
    ScenarioSpec spec;
    std::map<std::string, std::vector<RrSample>> rr;  // device clocks
    std::map<std::string, std::vector<GpsFix>> gps;   // device clocks
    std::map<std::string, ClockModel> clocks;
    GroundTruth truth;
};

/// Generates all streams in memory. Throws invalid_spec.
ScenarioData generate_scenario(const ScenarioSpec& spec);

/// Writes a generated scenario as <subject>.rr.jsonl / <subject>.gps.jsonl
/// plus clocks.json and ground_truth.json under dir.
void write_scenario(const ScenarioData& data, const std::filesystem::path& dir);

GroundTruth ground_truth_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GroundTruth& truth);

} // namespace banfusion
