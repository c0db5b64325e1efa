#include <doctest.h>

#include <random>

#include "banfusion/timesync.hpp"

using namespace banfusion;

TEST_SUITE("timesync") {

TEST_CASE("estimate_offset is exact under symmetric delays") {
    CHECK(estimate_offset(0, 60, 70, 30) == doctest::Approx(50.0)); // offset 50, delay 10
    CHECK(estimate_offset(0, 10, 20, 30) == doctest::Approx(0.0));  // offset 0
}

TEST_CASE("estimate_offset error equals half the delay asymmetry") {
    // delays 5 out / 15 back, true offset 0
    CHECK(estimate_offset(0, 5, 10, 25) == doctest::Approx(-5.0));
}

TEST_CASE("estimate_offset rejects non-monotonic exchanges") {
    CHECK_THROWS_WITH_AS(estimate_offset(10, 60, 70, 5),
                         doctest::Contains("non-monotonic"), Error);
    CHECK_THROWS_WITH_AS(estimate_offset(0, 70, 60, 30),
                         doctest::Contains("non-monotonic"), Error);
}

// Constructed exchanges: t1 = t0 + d_out + offset, t2 = t1 + proc,
// t3 = t2 - offset + d_in.
TEST_CASE("estimator error law over constructed exchanges") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
        const std::int64_t offset = static_cast<std::int64_t>(rng() % 4001) - 2000;
        const std::int64_t d_out = static_cast<std::int64_t>(rng() % 200);
        const std::int64_t proc = static_cast<std::int64_t>(rng() % 50);
        const std::int64_t t0 = 1'000'000 + static_cast<std::int64_t>(rng() % 1000);
        {
            // symmetric: exact recovery
            const std::int64_t t1 = t0 + d_out + offset;
            const std::int64_t t2 = t1 + proc;
            const std::int64_t t3 = t2 - offset + d_out;
            CHECK(estimate_offset(t0, t1, t2, t3) == static_cast<double>(offset));
        }
        {
            // asymmetric: |error| = |d_out - d_in| / 2 exactly
            const std::int64_t d_in = static_cast<std::int64_t>(rng() % 200);
            const std::int64_t t1 = t0 + d_out + offset;
            const std::int64_t t2 = t1 + proc;
            const std::int64_t t3 = t2 - offset + d_in;
            const double error = estimate_offset(t0, t1, t2, t3) - static_cast<double>(offset);
            CHECK(error == static_cast<double>(d_out - d_in) / 2.0);
        }
    }
}

TEST_CASE("to_common_clock maps and round-trips exactly") {
    ClockModel zero{"a", 0};
    CHECK(to_common_clock(10'000, zero) == 10'000);

    ClockModel ahead{"b", 2000};
    CHECK(to_common_clock(10'000, ahead) == 8'000);
    CHECK(to_device_clock(to_common_clock(123'456'789, ahead), ahead) == 123'456'789);

    ClockModel broken{"c", 2500};
    CHECK_THROWS_WITH_AS(to_common_clock(10'000, broken), doctest::Contains("invalid-model"),
                         Error);
}

TEST_CASE("check_skew reports the max pairwise gap") {
    SUBCASE("mixed offsets within budget") {
        auto report = check_skew({{"a", 0}, {"b", 500}, {"c", -700}});
        CHECK(report.max_gap_ms == 1200);
        CHECK(report.pass);
    }
    SUBCASE("single device trivially passes") {
        auto report = check_skew({{"a", 123}});
        CHECK(report.max_gap_ms == 0);
        CHECK(report.pass);
    }
    SUBCASE("gap beyond twice the bound fails") {
        auto report = check_skew({{"a", 0}, {"b", 4500, 2000}});
        CHECK_FALSE(report.pass);
    }
    SUBCASE("empty list") {
        CHECK_THROWS_WITH_AS(check_skew({}), doctest::Contains("empty-list"), Error);
    }
}

// brute force over all pairs, random offsets
TEST_CASE("check_skew agrees with a pairwise brute force") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ClockModel> models;
        const std::size_t n = 1 + rng() % 6;
        for (std::size_t i = 0; i < n; ++i) {
            models.push_back({"d" + std::to_string(i),
                              static_cast<std::int64_t>(rng() % 9001) - 4500, 2000});
        }
        DurationMs max_gap = 0;
        bool pass = true;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const DurationMs gap = std::abs(models[i].offset_ms - models[j].offset_ms);
                max_gap = std::max(max_gap, gap);
                if (gap > 4000) pass = false;
            }
        }
        const auto report = check_skew(models);
        CHECK(report.max_gap_ms == max_gap);
        CHECK(report.pass == pass);
    }
}

TEST_CASE("clock models load from json keyed by device") {
    const auto j = nlohmann::json::parse(R"({
        "subject1": {"offset_ms": -734},
        "subject2": {"offset_ms": 1200, "skew_bound_ms": 1500},
        "subject3": 42
    })");
    auto models = clock_models_from_json(j);
    CHECK(models.at("subject1").offset_ms == -734);
    CHECK(models.at("subject1").skew_bound_ms == kDefaultSkewBoundMs);
    CHECK(models.at("subject2").skew_bound_ms == 1500);
    CHECK(models.at("subject3").offset_ms == 42);

    CHECK_THROWS_AS(clock_models_from_json(nlohmann::json::parse(R"({"x": {"offset_ms": 1.5}})")),
                    Error);
}

} // TEST_SUITE
