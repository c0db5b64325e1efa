#include "banfusion/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace banfusion {

namespace {

constexpr TimestampMs kScenarioEpochMs = 1'700'000'000'000;
constexpr double kBaselineRrMs = 850.0;
constexpr double kRrNoiseMs = 30.0;

// walk geometry: office -> restaurant 200 m away at 1.4 m/s
constexpr double kOfficeLatDeg = 45.7800;
constexpr double kOfficeLonDeg = 4.8700;
constexpr double kWalkDistanceM = 200.0;
constexpr double kWalkSpeedMps = 1.4;
constexpr std::int64_t kWalkLeadInS = 30;
constexpr std::int64_t kGpsCadenceS = 5;
constexpr double kMetersPerDegLat = 111'194.9;

// physical-phase HR shape: quick rise to the bout level, a recovery tail,
// then a mildly elevated plateau between the two bouts
constexpr double kBoutElevationBpm = 10.0;
constexpr double kMidElevationBpm = 4.0;
constexpr std::int64_t kRampS = 20;
constexpr std::int64_t kRecoveryHoldS = 60;
constexpr std::int64_t kRecoveryDecayS = 120;

// mt19937_64 is fully specified, and the distributions below are hand-rolled,
// so streams are byte-identical for a given seed on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double normal() {
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

private:
    std::mt19937_64 gen_;
};

std::uint64_t sub_seed(std::uint64_t seed, int subject, int channel) {
    // splitmix64 over a composite key
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(subject) * 8 +
                                                      static_cast<std::uint64_t>(channel) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string subject_name(int index) { return "subject" + std::to_string(index + 1); }

struct WalkBout {
    std::int64_t start_s = 0; // relative to scenario start
    std::int64_t end_s = 0;
    bool outbound = true; // office -> restaurant
};

struct Profile {
    std::vector<WalkBout> walks;
    // HR elevation in bpm as a piecewise-linear function of scenario time
    std::vector<std::pair<std::int64_t, double>> hr_knots; // (t_s, elevation)
};

double elevation_at(const Profile& profile, double t_s) {
    const auto& knots = profile.hr_knots;
    if (knots.empty() || t_s <= static_cast<double>(knots.front().first)) {
        return knots.empty() ? 0.0 : knots.front().second;
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
        const auto [ta, ya] = knots[i - 1];
        const auto [tb, yb] = knots[i];
        if (t_s <= static_cast<double>(tb)) {
            const double w = static_cast<double>(tb - ta) > 0
                                 ? (t_s - static_cast<double>(ta)) / static_cast<double>(tb - ta)
                                 : 1.0;
            return ya + w * (yb - ya);
        }
    }
    return knots.back().second;
}

void append_knot(Profile& profile, std::int64_t t_s, double elevation) {
    profile.hr_knots.emplace_back(t_s, elevation);
}

// Builds one subject's elevation profile and the shared walk bouts.
Profile build_profile(const ScenarioSpec& spec, double cognitive_level) {
    Profile profile;
    const std::int64_t walk_s =
        static_cast<std::int64_t>(std::llround(kWalkDistanceM / kWalkSpeedMps));

    std::int64_t phase_start = 0;
    append_knot(profile, 0, 0.0);
    for (const auto& phase : spec.phases) {
        const std::int64_t phase_end = phase_start + phase.duration_s;
        switch (phase.label) {
            case ActivityLabel::physical: {
                const std::int64_t w1s = phase_start + kWalkLeadInS;
                const std::int64_t w1e = w1s + walk_s;
                const std::int64_t w2e = phase_end - kWalkLeadInS;
                const std::int64_t w2s = w2e - walk_s;
                profile.walks.push_back({w1s, w1e, true});
                profile.walks.push_back({w2s, w2e, false});

                append_knot(profile, w1s, 0.0);
                append_knot(profile, w1s + kRampS, kBoutElevationBpm);
                append_knot(profile, w1e + kRecoveryHoldS, kBoutElevationBpm);
                append_knot(profile, w1e + kRecoveryHoldS + kRecoveryDecayS, kMidElevationBpm);
                append_knot(profile, w2s, kMidElevationBpm);
                append_knot(profile, w2s + kRampS, kBoutElevationBpm);
                append_knot(profile, phase_end, kBoutElevationBpm);
                break;
            }
            case ActivityLabel::cognitive:
                append_knot(profile, phase_start, cognitive_level);
                append_knot(profile, phase_end, cognitive_level);
                break;
            case ActivityLabel::rest:
                append_knot(profile, phase_start, 0.0);
                append_knot(profile, phase_end, 0.0);
                break;
        }
        phase_start = phase_end;
    }
    return profile;
}

void validate_spec(const ScenarioSpec& spec) {
    if (spec.name.empty()) throw Error(Errc::invalid_spec, "scenario name must be non-empty");
    if (spec.subjects < 1) throw Error(Errc::invalid_spec, "need at least one subject");
    if (spec.phases.empty()) throw Error(Errc::invalid_spec, "need at least one phase");
    const std::int64_t walk_s =
        static_cast<std::int64_t>(std::llround(kWalkDistanceM / kWalkSpeedMps));
    for (const auto& phase : spec.phases) {
        if (phase.duration_s <= 0) throw Error(Errc::invalid_spec, "phase durations must be > 0");
        if (phase.label == ActivityLabel::physical &&
            phase.duration_s < 2 * (kWalkLeadInS + walk_s) + kRecoveryHoldS + kRecoveryDecayS) {
            throw Error(Errc::invalid_spec, "physical phase too short for two walk bouts");
        }
    }
}

} // namespace

ScenarioSpec ScenarioSpec::lunch(std::uint64_t seed, int subjects) {
    ScenarioSpec spec;
    spec.name = "lunch";
    spec.subjects = subjects;
    spec.seed = seed;
    spec.phases = {
        {ActivityLabel::physical, 900},
        {ActivityLabel::cognitive, 1200},
        {ActivityLabel::rest, 2700},
    };
    return spec;
}

ScenarioData generate_scenario(const ScenarioSpec& spec) {
    validate_spec(spec);

    ScenarioData data;
    data.spec = spec;
    data.truth.t0_ms = kScenarioEpochMs;

    std::int64_t total_s = 0;
    for (const auto& phase : spec.phases) {
        data.truth.phases.push_back({phase.label, kScenarioEpochMs + total_s * 1000,
                                     kScenarioEpochMs + (total_s + phase.duration_s) * 1000});
        total_s += phase.duration_s;
    }

    // cards press unevenly: two subjects carry the load, the rest follow
    Rng group_rng(sub_seed(spec.seed, -1, 0));
    std::vector<int> order(spec.subjects);
    for (int i = 0; i < spec.subjects; ++i) order[i] = i;
    for (int i = spec.subjects - 1; i > 0; --i) {
        std::swap(order[i], order[group_rng.uniform_int(0, i)]);
    }
    std::set<int> stressed_idx;
    for (int i = 0; i < std::min(2, spec.subjects); ++i) stressed_idx.insert(order[i]);

    const double base_hr = 60'000.0 / kBaselineRrMs;

    for (int s = 0; s < spec.subjects; ++s) {
        const std::string subject = subject_name(s);
        Rng rr_rng(sub_seed(spec.seed, s, 1));
        Rng gps_rng(sub_seed(spec.seed, s, 2));
        Rng clock_rng(sub_seed(spec.seed, s, 3));

        const bool stressed = stressed_idx.contains(s);
        if (stressed) data.truth.stressed.insert(subject);
        const double cognitive_level =
            stressed ? rr_rng.uniform(10.0, 12.0) : rr_rng.uniform(2.0, 2.8);
        const Profile profile = build_profile(spec, cognitive_level);

        if (s == 0) {
            for (const auto& walk : profile.walks) {
                data.truth.walks.push_back({kScenarioEpochMs + walk.start_s * 1000,
                                            kScenarioEpochMs + walk.end_s * 1000});
            }
        }

        ClockModel clock;
        clock.device_id = subject;
        clock.offset_ms = clock_rng.uniform_int(-2000, 2000);
        data.clocks[subject] = clock;

        // R-R stream: beat times chain through the sampled intervals
        std::vector<RrSample>& rr = data.rr[subject];
        std::int64_t beat_ms = 0; // relative to scenario start
        std::int64_t seq = 0;
        while (true) {
            const double elevation = elevation_at(profile, static_cast<double>(beat_ms) / 1000.0);
            const double target_rr = 60'000.0 / (base_hr + elevation);
            const double drawn = target_rr + kRrNoiseMs * rr_rng.normal();
            const std::int64_t rr_ms =
                std::clamp<std::int64_t>(static_cast<std::int64_t>(std::llround(drawn)), 200, 3000);
            beat_ms += rr_ms;
            if (beat_ms > total_s * 1000) break;
            RrSample sample;
            sample.device_id = subject;
            sample.seq = seq++;
            sample.rr_ms = rr_ms;
            sample.reception_ts = kScenarioEpochMs + beat_ms + clock.offset_ms +
                                  rr_rng.uniform_int(0, 30);
            rr.push_back(std::move(sample));
        }

        // GPS stream: office <-> restaurant along a shared path, with a small
        // per-subject lateral offset and accuracy-scaled position noise
        const double lateral_m = 1.5 * static_cast<double>(s);
        const double lat_per_m = 1.0 / kMetersPerDegLat;
        const double lon_per_m =
            1.0 / (kMetersPerDegLat * std::cos(kOfficeLatDeg * std::numbers::pi / 180.0));

        std::vector<GpsFix>& gps = data.gps[subject];
        for (std::int64_t t_s = 0; t_s <= total_s; t_s += kGpsCadenceS) {
            double along_m = 0.0; // distance from office toward restaurant
            bool outdoors = false;
            for (const auto& walk : profile.walks) {
                if (t_s >= walk.start_s && t_s <= walk.end_s) {
                    const double frac = static_cast<double>(t_s - walk.start_s) /
                                        static_cast<double>(walk.end_s - walk.start_s);
                    along_m = walk.outbound ? frac * kWalkDistanceM
                                            : (1.0 - frac) * kWalkDistanceM;
                    outdoors = true;
                    break;
                }
            }
            if (!outdoors) {
                // at whichever end the last walk left us
                bool at_restaurant = false;
                for (const auto& walk : profile.walks) {
                    if (t_s > walk.end_s) at_restaurant = walk.outbound;
                }
                along_m = at_restaurant ? kWalkDistanceM : 0.0;
            }

            // log-uniform: outdoor fixes cluster in the usable sub-20 m range,
            // indoor estimates spread across the whole Wi-Fi/GSM envelope
            const double accuracy = outdoors ? gps_rng.log_uniform(4.0, 50.0)
                                             : gps_rng.log_uniform(50.0, 1200.0);
            // Indoor accuracy estimates are pessimistic by a wide margin: the
            // phone sits inside one building even when Wi-Fi/GSM positioning
            // claims km-scale uncertainty, so true scatter is capped.
            const double sigma = std::min(accuracy / 4.0, 30.0);
            const double east_m = along_m + sigma * gps_rng.normal();
            const double north_m = lateral_m + sigma * gps_rng.normal();

            GpsFix fix;
            fix.device_id = subject;
            fix.ts = kScenarioEpochMs + t_s * 1000 + clock.offset_ms;
            fix.lat_deg = kOfficeLatDeg + north_m * lat_per_m;
            fix.lon_deg = kOfficeLonDeg + east_m * lon_per_m;
            fix.accuracy_m = accuracy;
            gps.push_back(std::move(fix));
        }
    }
    return data;
}

void write_scenario(const ScenarioData& data, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::io_error, "cannot create '" + dir.string() + "': " + ec.message());

    auto open = [&](const std::filesystem::path& path) {
        std::ofstream out(path, std::ios::trunc);
        if (!out.is_open()) throw Error(Errc::io_error, "cannot write '" + path.string() + "'");
        return out;
    };

    for (const auto& [subject, samples] : data.rr) {
        auto out = open(dir / (subject + ".rr.jsonl"));
        for (const auto& s : samples) out << encode_line(BatchRecord{s}) << '\n';
    }
    for (const auto& [subject, fixes] : data.gps) {
        auto out = open(dir / (subject + ".gps.jsonl"));
        for (const auto& f : fixes) out << encode_line(BatchRecord{f}) << '\n';
    }

    nlohmann::json clocks = nlohmann::json::object();
    for (const auto& [subject, model] : data.clocks) {
        clocks[subject] = {{"offset_ms", model.offset_ms}, {"skew_bound_ms", model.skew_bound_ms}};
    }
    open(dir / "clocks.json") << clocks.dump(2) << '\n';
    open(dir / "ground_truth.json") << to_json(data.truth).dump(2) << '\n';
}

nlohmann::json to_json(const GroundTruth& truth) {
    nlohmann::json phases = nlohmann::json::array();
    for (const auto& p : truth.phases) {
        phases.push_back({{"label", activity_label_name(p.label)},
                          {"start_ts", p.start_ts},
                          {"end_ts", p.end_ts}});
    }
    nlohmann::json walks = nlohmann::json::array();
    for (const auto& w : truth.walks) {
        walks.push_back({{"start_ts", w.start}, {"end_ts", w.end}});
    }
    return {{"t0_ms", truth.t0_ms},
            {"phases", phases},
            {"walks", walks},
            {"stressed", truth.stressed}};
}

GroundTruth ground_truth_from_json(const nlohmann::json& j) {
    GroundTruth truth;
    truth.t0_ms = j.at("t0_ms").get<TimestampMs>();
    for (const auto& p : j.at("phases")) {
        truth.phases.push_back({activity_label_from_string(p.at("label").get<std::string>()),
                                p.at("start_ts").get<TimestampMs>(),
                                p.at("end_ts").get<TimestampMs>()});
    }
    for (const auto& w : j.at("walks")) {
        truth.walks.push_back({w.at("start_ts").get<TimestampMs>(),
                               w.at("end_ts").get<TimestampMs>()});
    }
    for (const auto& s : j.at("stressed")) truth.stressed.insert(s.get<std::string>());
    return truth;
}

} // namespace banfusion
