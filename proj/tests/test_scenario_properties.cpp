#include <doctest.h>

#include <cmath>

#include "banfusion/activity.hpp"
#include "banfusion/ban_ingest.hpp"
#include "banfusion/hrv.hpp"
#include "banfusion/scenario.hpp"
#include "banfusion/timesync.hpp"

using namespace banfusion;

namespace {

std::map<std::string, NormalizedHrSeries> series_for(const ScenarioData& data) {
    std::map<std::string, NormalizedHrSeries> series;
    for (const auto& [subject, samples] : data.rr) {
        auto aligned = samples;
        for (auto& s : aligned) {
            s.reception_ts = to_common_clock(s.reception_ts, data.clocks.at(subject));
        }
        series[subject] = normalized_hr_series(reconstruct_beat_times(aligned));
    }
    return series;
}

} // namespace

TEST_SUITE("scenario_properties") {

// each walk bout leaves its own peak: group elevation over the physical
// phase, at 60 s granularity, has exactly 2 local maxima above E_act
TEST_CASE("the physical phase carries exactly two elevation peaks") {
    const auto data = generate_scenario(ScenarioSpec::lunch(42));
    const auto series = series_for(data);
    const auto& physical = data.truth.phases[0];

    std::vector<double> elevation;
    for (TimestampMs t = physical.start_ts; t + 60'000 <= physical.end_ts; t += 60'000) {
        try {
            elevation.push_back(group_elevation(series, {t, t + 60'000}));
        } catch (const Error&) {
            // the first trailing window is still filling at the record edge
        }
    }
    REQUIRE(elevation.size() >= 10);

    int maxima = 0;
    for (std::size_t i = 0; i < elevation.size(); ++i) {
        if (elevation[i] < 5.0) continue; // only peaks above E_act count
        const bool left = i == 0 || elevation[i] > elevation[i - 1];
        const bool right = i + 1 == elevation.size() || elevation[i] > elevation[i + 1];
        if (left && right) ++maxima;
    }
    CHECK(maxima == 2);
}

// dispersion separates the card game from the walk on the simulator output
TEST_CASE("cognitive dispersion exceeds physical dispersion") {
    const auto data = generate_scenario(ScenarioSpec::lunch(42));
    const auto series = series_for(data);
    const auto& phases = data.truth.phases;
    const double physical =
        inter_subject_dispersion(series, {phases[0].start_ts, phases[0].end_ts});
    const double cognitive =
        inter_subject_dispersion(series, {phases[1].start_ts, phases[1].end_ts});
    CHECK(cognitive > physical);
}

// median subtraction absorbs a constant shift of every subject's raw HR
TEST_CASE("labels are invariant under a constant HR offset") {
    auto beats_for = [](double shift_bpm) {
        std::map<std::string, NormalizedHrSeries> series;
        for (int subject = 0; subject < 4; ++subject) {
            const double cognitive = subject < 2 ? 11.0 : 2.5;
            std::vector<ReconstructedBeat> beats;
            TimestampMs t = 0;
            std::int64_t seq = 0;
            while (t <= 2'400'000) {
                double elevation = 0.0;
                if (t < 600'000) elevation = 8.0;
                else if (t < 1'200'000) elevation = cognitive;
                const double hr = 70.0 + elevation + shift_bpm;
                const auto rr = static_cast<std::int64_t>(std::llround(60'000.0 / hr));
                t += rr;
                beats.push_back({"s" + std::to_string(subject), seq++, t, rr});
            }
            series["s" + std::to_string(subject)] = normalized_hr_series(beats);
        }
        return series;
    };

    const auto base = classify_segments(beats_for(0.0), {});
    const auto shifted = classify_segments(beats_for(6.0), {});
    REQUIRE(base.size() == shifted.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].label == shifted[i].label);
        CHECK(std::abs(base[i].start_ts - shifted[i].start_ts) <= 60'000);
        CHECK(std::abs(base[i].end_ts - shifted[i].end_ts) <= 60'000);
    }
}

} // TEST_SUITE
