#include <doctest.h>

#include "specstream/config.hpp"

using namespace specstream;

TEST_CASE("default config satisfies its own invariants") {
    DetectorConfig cfg;
    CHECK_NOTHROW(cfg.check());
    CHECK(cfg.recentWinSize == 20);
    CHECK(cfg.historicWinSize == 200);
    CHECK(cfg.warmupSamples == 220);
}

TEST_CASE("config survives a save/load round trip") {
    DetectorConfig cfg;
    cfg.alpha = 0.005;
    cfg.marginDb = 2.5;
    cfg.freqGapF = 3;
    cfg.timeGapT = 4;
    cfg.warmupSamples = 300;

    const DetectorConfig back = load_config(save_config(cfg));
    CHECK(back.alpha == cfg.alpha);
    CHECK(back.marginDb == cfg.marginDb);
    CHECK(back.freqGapF == cfg.freqGapF);
    CHECK(back.timeGapT == cfg.timeGapT);
    CHECK(back.warmupSamples == cfg.warmupSamples);
    CHECK(back.recentWinSize == cfg.recentWinSize);
}

TEST_CASE("empty or whitespace config text means all defaults") {
    const DetectorConfig a = load_config("");
    const DetectorConfig b = load_config("  \n\t ");
    CHECK(a.alpha == b.alpha);
    CHECK(a.warmupSamples == 220);
}

TEST_CASE("omitted warmup defaults to both window lengths combined") {
    const DetectorConfig cfg = load_config(R"({"recentWinSize": 10, "historicWinSize": 50})");
    CHECK(cfg.warmupSamples == 60);
}

TEST_CASE("config invariant violations are rejected") {
    CHECK_THROWS_AS(load_config(R"({"recentWinSize": 1})"), ConfigError);
    CHECK_THROWS_AS(load_config(R"({"recentWinSize": 50, "historicWinSize": 50})"),
                    ConfigError);
    CHECK_THROWS_AS(load_config(R"({"alpha": 0.0})"), ConfigError);
    CHECK_THROWS_AS(load_config(R"({"alpha": 1.0})"), ConfigError);
    CHECK_THROWS_AS(load_config(R"({"marginDb": -1.0})"), ConfigError);
    CHECK_THROWS_AS(load_config(R"({"freqGapF": -1})"), ConfigError);
    CHECK_THROWS_AS(load_config(R"({"warmupSamples": 10})"), ConfigError);
    CHECK_THROWS_AS(load_config(R"({"histLowerBound": -20, "histUpperBound": -120})"),
                    ConfigError);
    CHECK_THROWS_AS(load_config(R"({"numHistBins": 1})"), ConfigError);
}

TEST_CASE("unknown keys and wrong types are rejected, not ignored") {
    CHECK_THROWS_AS(load_config(R"({"recentWinSiez": 20})"), ConfigError);
    CHECK_THROWS_AS(load_config(R"({"alpha": "small"})"), ConfigError);
    CHECK_THROWS_AS(load_config("not json at all"), ConfigError);
}

TEST_CASE("band plan keys are optional but validated when present") {
    CHECK_FALSE(load_band_plan(R"({"alpha": 0.01})").has_value());

    const auto plan = load_band_plan(
        R"({"startFrequencyHz": 868.0e6, "binWidthHz": 1000.0, "binCount": 64})");
    REQUIRE(plan.has_value());
    CHECK(plan->binCount == 64);
    CHECK(plan->frequencyOf(0) == doctest::Approx(868.0e6 + 500.0));

    CHECK_THROWS_AS(load_band_plan(R"({"startFrequencyHz": 1.0e6, "binWidthHz": 0.0,
                                       "binCount": 8})"),
                    ConfigError);
    CHECK_THROWS_AS(load_band_plan(R"({"startFrequencyHz": 1.0e6, "binWidthHz": 100.0,
                                       "binCount": 0})"),
                    ConfigError);
}
