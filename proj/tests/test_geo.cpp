#include <doctest.h>

#include <random>

#include "banfusion/geo.hpp"
#include "helpers.hpp"

using namespace banfusion;
using namespace banfusion::test;

namespace {

std::vector<GpsFix> stationary_trace(const std::string& device, double lat, double lon,
                                     double accuracy, int n, TimestampMs t0 = 0,
                                     DurationMs step_ms = 5000) {
    std::vector<GpsFix> fixes;
    for (int i = 0; i < n; ++i) fixes.push_back({device, t0 + i * step_ms, lat, lon, accuracy});
    return fixes;
}

// straight walk along the lon axis (speed sign sets the direction), one fix per 5 s
std::vector<GpsFix> walk_trace(const std::string& device, double lat, double lon,
                               double distance_m, double speed_mps, double accuracy,
                               TimestampMs t0 = 0) {
    std::vector<GpsFix> fixes;
    const double lon_per_m = 1.0 / (111'194.9 * std::cos(lat * std::numbers::pi / 180.0));
    const double duration_s = distance_m / std::abs(speed_mps);
    for (double t = 0; t <= duration_s; t += 5.0) {
        fixes.push_back({device, t0 + static_cast<TimestampMs>(t * 1000),
                         lat, lon + speed_mps * t * lon_per_m, accuracy});
    }
    return fixes;
}

} // namespace

TEST_SUITE("geo") {

TEST_CASE("haversine on reference pairs") {
    CHECK(haversine_m(45.0, 4.0, 45.0, 4.0) == doctest::Approx(0.0));

    // oracle: spherical law of cosines with the same Earth radius
    const double lat_step = spherical_law_of_cosines_m(45.000, 4.000, 45.001, 4.000);
    CHECK(lat_step == doctest::Approx(111.19).epsilon(1e-3));
    CHECK(haversine_m(45.000, 4.000, 45.001, 4.000) == doctest::Approx(lat_step).epsilon(1e-6));

    const double lon_step = spherical_law_of_cosines_m(45.000, 4.000, 45.000, 4.001);
    CHECK(lon_step == doctest::Approx(78.6).epsilon(1e-2));
    CHECK(haversine_m(45.000, 4.000, 45.000, 4.001) == doctest::Approx(lon_step).epsilon(1e-6));

    CHECK_THROWS_WITH_AS(haversine_m(91.0, 0.0, 0.0, 0.0),
                         doctest::Contains("out-of-range"), Error);
}

TEST_CASE("haversine matches the law-of-cosines oracle on random nearby pairs") {
    std::mt19937_64 rng(17);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int i = 0; i < 1000; ++i) {
        const double lat = uniform(-60, 60);
        const double lon = uniform(-179, 179);
        const double lat2 = lat + uniform(-0.06, 0.06);
        const double lon2 = lon + uniform(-0.06, 0.06);
        const double expected = spherical_law_of_cosines_m(lat, lon, lat2, lon2);
        CHECK(std::abs(haversine_m(lat, lon, lat2, lon2) - expected) < 0.1);
    }
}

TEST_CASE("haversine is symmetric and respects the triangle inequality") {
    std::mt19937_64 rng(18);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int i = 0; i < 1000; ++i) {
        const double a_lat = uniform(-80, 80), a_lon = uniform(-180, 180);
        const double b_lat = uniform(-80, 80), b_lon = uniform(-180, 180);
        const double c_lat = uniform(-80, 80), c_lon = uniform(-180, 180);
        const double ab = haversine_m(a_lat, a_lon, b_lat, b_lon);
        const double ba = haversine_m(b_lat, b_lon, a_lat, a_lon);
        CHECK(ab == ba);
        const double bc = haversine_m(b_lat, b_lon, c_lat, c_lon);
        const double ac = haversine_m(a_lat, a_lon, c_lat, c_lon);
        CHECK(ac <= ab + bc + 1e-6 * (ab + bc));
    }
}

TEST_CASE("four subjects sharing a spot form one group event") {
    std::map<std::string, std::vector<GpsFix>> fixes;
    for (int s = 0; s < 4; ++s) {
        fixes["subject" + std::to_string(s + 1)] =
            stationary_trace("subject" + std::to_string(s + 1), 45.0, 4.0, 10.0, 360);
    }
    const auto events = detect_colocation(fixes);
    REQUIRE(events.size() == 1);
    CHECK(events[0].subject_ids.size() == 4);
    CHECK(events[0].max_spread_m == doctest::Approx(0.0));
    CHECK(events[0].end_ts - events[0].start_ts >= 29 * 60'000);
}

TEST_CASE("far-apart subjects never co-locate") {
    std::map<std::string, std::vector<GpsFix>> fixes;
    fixes["a"] = stationary_trace("a", 45.0, 4.0, 4.0, 100);
    fixes["b"] = stationary_trace("b", 45.1, 4.0, 4.0, 100); // > 10 km away
    CHECK(detect_colocation(fixes).empty());
}

TEST_CASE("accuracy inflates the co-location rule") {
    // 5 m apart, accuracies 4 m each, zero base tolerance: 5 <= 0 + 4 + 4
    const double lon_per_m = 1.0 / (111'194.9 * std::cos(45.0 * std::numbers::pi / 180.0));
    std::map<std::string, std::vector<GpsFix>> fixes;
    fixes["a"] = stationary_trace("a", 45.0, 4.0, 4.0, 100);
    fixes["b"] = stationary_trace("b", 45.0, 4.0 + 5.0 * lon_per_m, 4.0, 100);
    ColocationParams params;
    params.dist_tol_m = 0.0;
    const auto events = detect_colocation(fixes, params);
    REQUIRE(events.size() == 1);
    CHECK(events[0].subject_ids == std::set<std::string>{"a", "b"});
    CHECK(events[0].max_spread_m == doctest::Approx(5.0).epsilon(0.01));

    // shrink the accuracies and the pair separates
    for (auto& [_, trace] : fixes) {
        for (auto& fix : trace) fix.accuracy_m = 2.0;
    }
    CHECK(detect_colocation(fixes, params).empty());
}

TEST_CASE("growing accuracies never remove a co-location") {
    std::mt19937_64 rng(19);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 20; ++trial) {
        std::map<std::string, std::vector<GpsFix>> fixes;
        for (int s = 0; s < 3; ++s) {
            const std::string id = "s" + std::to_string(s);
            const double lat = 45.0 + uniform(-0.0004, 0.0004);
            const double lon = 4.0 + uniform(-0.0004, 0.0004);
            fixes[id] = stationary_trace(id, lat, lon, uniform(4, 30), 60);
        }
        const auto before = detect_colocation(fixes);

        auto inflated = fixes;
        for (auto& [_, trace] : inflated) {
            for (auto& fix : trace) fix.accuracy_m *= 2.0;
        }
        const auto after = detect_colocation(inflated);

        // every original event survives, possibly absorbed into a larger one
        for (const auto& ev : before) {
            const bool covered = std::any_of(after.begin(), after.end(), [&](const auto& big) {
                return std::includes(big.subject_ids.begin(), big.subject_ids.end(),
                                     ev.subject_ids.begin(), ev.subject_ids.end()) &&
                       big.start_ts <= ev.start_ts && big.end_ts >= ev.end_ts;
            });
            CHECK(covered);
        }
    }
}

TEST_CASE("co-location events are invariant under subject relabeling") {
    const double lon_per_m = 1.0 / (111'194.9 * std::cos(45.0 * std::numbers::pi / 180.0));
    std::map<std::string, std::vector<GpsFix>> fixes;
    fixes["a"] = stationary_trace("a", 45.0, 4.0, 10.0, 80);
    fixes["b"] = stationary_trace("b", 45.0, 4.0 + 3.0 * lon_per_m, 10.0, 80);

    std::map<std::string, std::vector<GpsFix>> relabeled;
    relabeled["b"] = fixes["a"];
    relabeled["a"] = fixes["b"];
    for (auto& f : relabeled["b"]) f.device_id = "b";
    for (auto& f : relabeled["a"]) f.device_id = "a";

    const auto ev1 = detect_colocation(fixes);
    const auto ev2 = detect_colocation(relabeled);
    REQUIRE(ev1.size() == ev2.size());
    for (std::size_t i = 0; i < ev1.size(); ++i) {
        CHECK(ev1[i].subject_ids == ev2[i].subject_ids);
        CHECK(ev1[i].start_ts == ev2[i].start_ts);
        CHECK(ev1[i].end_ts == ev2[i].end_ts);
    }
}

TEST_CASE("unsorted fixes are rejected") {
    std::map<std::string, std::vector<GpsFix>> fixes;
    fixes["a"] = stationary_trace("a", 45.0, 4.0, 10.0, 5);
    std::swap(fixes["a"][0], fixes["a"][1]);
    CHECK_THROWS_WITH_AS(detect_colocation(fixes), doctest::Contains("unsorted-fixes"), Error);
    CHECK_THROWS_WITH_AS(detect_movement(fixes["a"]), doctest::Contains("unsorted-fixes"), Error);
}

TEST_CASE("stationary jitter within accuracy is not movement") {
    std::mt19937_64 rng(20);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    std::vector<GpsFix> fixes;
    const double lat_per_m = 1.0 / 111'194.9;
    for (int i = 0; i < 240; ++i) {
        // jitter inside the 10 m accuracy circle
        const double r = 10.0 * uniform(0, 1);
        const double theta = uniform(0, 2 * std::numbers::pi);
        fixes.push_back({"a", i * 5000, 45.0 + r * std::cos(theta) * lat_per_m,
                         4.0 + r * std::sin(theta) * lat_per_m, 10.0});
    }
    CHECK(detect_movement(fixes).empty());
}

TEST_CASE("movement never fires on a constant position, whatever the accuracy") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const double accuracy = 4.0 + static_cast<double>(rng() % 1200);
        auto fixes = stationary_trace("a", 45.0, 4.0, accuracy, 120);
        CHECK(detect_movement(fixes).empty());
    }
}

TEST_CASE("a 200 m walk is one interval with the right displacement") {
    const auto fixes = walk_trace("a", 45.0, 4.0, 200.0, 1.4, 8.0);
    const auto intervals = detect_movement(fixes);
    REQUIRE(intervals.size() == 1);
    CHECK(intervals[0].displacement_m == doctest::Approx(200.0).epsilon(0.15));
    CHECK(intervals[0].mean_speed_mps == doctest::Approx(1.4).epsilon(0.15));
    // the invariant ties speed to displacement over duration
    const double duration_s =
        static_cast<double>(intervals[0].end_ts - intervals[0].start_ts) / 1000.0;
    CHECK(intervals[0].mean_speed_mps ==
          doctest::Approx(intervals[0].displacement_m / duration_s).epsilon(1e-6));
}

TEST_CASE("walk, pause, walk back gives two intervals") {
    std::vector<GpsFix> fixes = walk_trace("a", 45.0, 4.0, 200.0, 1.4, 8.0);
    const TimestampMs walk_end = fixes.back().ts;
    const double far_lon = fixes.back().lon_deg;
    // 10 min pause at the restaurant
    for (TimestampMs t = walk_end + 5000; t <= walk_end + 600'000; t += 5000) {
        fixes.push_back({"a", t, 45.0, far_lon, 8.0});
    }
    // walk back
    auto back = walk_trace("a", 45.0, far_lon, 200.0, -1.4, 8.0, fixes.back().ts + 5000);
    fixes.insert(fixes.end(), back.begin(), back.end());

    const auto intervals = detect_movement(fixes);
    CHECK(intervals.size() == 2);
}

TEST_CASE("movement csv header and rows") {
    MovementInterval m{"a", 1000, 61'000, 84.5, 1.4083};
    CHECK(movement_csv({m}) == "device_id,start,end,displacement_m,mean_speed_mps\n"
                               "a,1000,61000,84.50,1.4083\n");
}

TEST_CASE("geojson carries fixes and centroids") {
    std::map<std::string, std::vector<GpsFix>> fixes;
    fixes["a"] = stationary_trace("a", 45.0, 4.0, 10.0, 3);
    ColocationEvent ev;
    ev.subject_ids = {"a", "b"};
    ev.start_ts = 0;
    ev.end_ts = 60'000;
    ev.centroid_lat_deg = 45.0;
    ev.centroid_lon_deg = 4.0;
    const auto geojson = nlohmann::json::parse(geojson_export(fixes, {ev}));
    CHECK(geojson["type"] == "FeatureCollection");
    REQUIRE(geojson["features"].size() == 4);
    CHECK(geojson["features"][0]["properties"]["kind"] == "fix");
    CHECK(geojson["features"][3]["properties"]["kind"] == "colocation_centroid");
    // GeoJSON order: [lon, lat]
    CHECK(geojson["features"][0]["geometry"]["coordinates"][0] == doctest::Approx(4.0));
}

} // TEST_SUITE
