#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "specstream/reporting.hpp"

using namespace specstream;

namespace {

BandPlan four_bins() { return {868.0e6, 100e3, 4}; }

SpectrumEvent ev(EventId id, TimestampMs tStart, TimestampMs tStop, BinIndex fStart,
                 BinIndex fStop, double powerDbm) {
    SpectrumEvent e;
    e.id = id;
    e.tStart = tStart;
    e.tStop = tStop;
    e.fStartBin = fStart;
    e.fStopBin = fStop;
    e.meanPowerDbm = powerDbm;
    return e;
}

// The fixture every number below is computed from, by hand:
//   id 1:    0..2000  bin 0      -60 dBm   3 ticks x 1 bin  =  3 cells
//   id 2: 3000..5000  bins 0..1  -70 dBm   3 ticks x 2 bins =  6 cells
//   id 3: 1000..1000  bin 2      -50 dBm   1 tick  x 1 bin  =  1 cell
//   id 4: 6000..9000  bins 1..3  -80 dBm   4 ticks x 3 bins = 12 cells
//   id 5: 9000..9000  bin 3      -65 dBm   1 tick  x 1 bin  =  1 cell
// over period [0, 10000) at 1000 ms ticks (10 ticks x 4 bins = 40 cells).
std::vector<SpectrumEvent> fixture() {
    return {ev(1, 0, 2000, 0, 0, -60.0),   ev(2, 3000, 5000, 0, 1, -70.0),
            ev(3, 1000, 1000, 2, 2, -50.0), ev(4, 6000, 9000, 1, 3, -80.0),
            ev(5, 9000, 9000, 3, 3, -65.0)};
}

double mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

constexpr double kTight = 1e-9;  // relative

}  // namespace

TEST_CASE("hand-computed report over five events") {
    ReportBuilder builder(0, 10000, 1000, four_bins(),
                          {{"chA", 0, 1}, {"chB", 2, 3}});
    for (const auto& e : fixture()) builder.accumulate(e);
    const SpectrumReport r = builder.report();

    CHECK(r.totalTransmissions == 5);
    // Durations: 2000 + 2000 + 0 + 3000 + 0 = 7000 over 5 events.
    REQUIRE(r.avgDurationMs.has_value());
    CHECK(*r.avgDurationMs == doctest::Approx(1400.0).epsilon(kTight));
    CHECK(r.activeCells == 23);
    CHECK(r.occupancyFraction == doctest::Approx(23.0 / 40.0).epsilon(kTight));

    // Cell-weighted linear power mean.
    const double totalMw =
        3 * mw(-60) + 6 * mw(-70) + 1 * mw(-50) + 12 * mw(-80) + 1 * mw(-65);
    REQUIRE(r.avgPowerDbm.has_value());
    CHECK(*r.avgPowerDbm ==
          doctest::Approx(10.0 * std::log10(totalMw / 23.0)).epsilon(kTight));
    CHECK(*r.avgPowerDbm == doctest::Approx(-62.14477429).epsilon(1e-7));

    // Per-bin: 10 ticks each.
    REQUIRE(r.perBin.size() == 4);
    CHECK(r.perBin[0].txCount == 2);  // ids 1, 2
    CHECK(r.perBin[0].activeCells == 6);
    CHECK(r.perBin[0].occupancyFraction == doctest::Approx(0.6).epsilon(kTight));
    CHECK(*r.perBin[0].avgPowerDbm ==
          doctest::Approx(10.0 * std::log10((3 * mw(-60) + 3 * mw(-70)) / 6.0))
              .epsilon(kTight));
    CHECK(r.perBin[1].txCount == 2);  // ids 2, 4
    CHECK(r.perBin[1].activeCells == 7);
    CHECK(r.perBin[2].txCount == 2);  // ids 3, 4
    CHECK(r.perBin[2].activeCells == 5);
    CHECK(*r.perBin[2].avgPowerDbm ==
          doctest::Approx(10.0 * std::log10((1 * mw(-50) + 4 * mw(-80)) / 5.0))
              .epsilon(kTight));
    CHECK(r.perBin[3].txCount == 2);  // ids 4, 5
    CHECK(r.perBin[3].activeCells == 5);

    // Channels: chA = bins 0..1 (20 cells total), chB = bins 2..3.
    REQUIRE(r.perChannel.size() == 2);
    const auto& chA = r.perChannel[0].second;
    CHECK(chA.txCount == 3);  // ids 1, 2, 4
    CHECK(chA.activeCells == 3 + 6 + 4);
    CHECK(chA.occupancyFraction == doctest::Approx(13.0 / 20.0).epsilon(kTight));
    CHECK(*chA.avgPowerDbm ==
          doctest::Approx(10.0 * std::log10((3 * mw(-60) + 6 * mw(-70) + 4 * mw(-80)) / 13.0))
              .epsilon(kTight));
    const auto& chB = r.perChannel[1].second;
    CHECK(chB.txCount == 3);  // ids 3, 4, 5
    CHECK(chB.activeCells == 1 + 8 + 1);
    CHECK(chB.occupancyFraction == doctest::Approx(0.5).epsilon(kTight));
}

TEST_CASE("accumulation order does not matter") {
    ReportBuilder forward(0, 10000, 1000, four_bins());
    ReportBuilder backward(0, 10000, 1000, four_bins());
    auto events = fixture();
    for (const auto& e : events) forward.accumulate(e);
    for (auto it = events.rbegin(); it != events.rend(); ++it) backward.accumulate(*it);

    const auto a = forward.report();
    const auto b = backward.report();
    CHECK(a.totalTransmissions == b.totalTransmissions);
    CHECK(a.activeCells == b.activeCells);
    CHECK(*a.avgPowerDbm == doctest::Approx(*b.avgPowerDbm).epsilon(1e-12));
    CHECK(a.occupancyFraction == doctest::Approx(b.occupancyFraction).epsilon(1e-12));
    for (std::size_t i = 0; i < a.perBin.size(); ++i) {
        CHECK(a.perBin[i].activeCells == b.perBin[i].activeCells);
    }
}

TEST_CASE("events outside the period or band are refused") {
    ReportBuilder builder(1000, 11000, 1000, four_bins());
    CHECK_THROWS_AS(builder.accumulate(ev(1, 0, 2000, 0, 0, -60)), OutOfPeriod);
    // The period end is exclusive: an event ending exactly there is out.
    CHECK_THROWS_AS(builder.accumulate(ev(2, 9000, 11000, 0, 0, -60)), OutOfPeriod);
    builder.accumulate(ev(3, 9000, 10000, 0, 0, -60));
    CHECK_THROWS_AS(builder.accumulate(ev(4, 2000, 3000, 7, 9, -60)), OutOfPeriod);
    CHECK(builder.report().totalTransmissions == 1);
}

TEST_CASE("builder rejects malformed periods and channels") {
    CHECK_THROWS_AS(ReportBuilder(0, 0, 1000, four_bins()), std::invalid_argument);
    CHECK_THROWS_AS(ReportBuilder(0, 1500, 1000, four_bins()), std::invalid_argument);
    CHECK_THROWS_AS(ReportBuilder(0, 1000, 0, four_bins()), std::invalid_argument);
    CHECK_THROWS_AS(ReportBuilder(0, 1000, 1000, four_bins(), {{"wide", 0, 4}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ReportBuilder(0, 1000, 1000, four_bins(), {{"inverted", 2, 1}}),
                    std::invalid_argument);
}

TEST_CASE("merged half-period reports equal the whole-period report") {
    ReportBuilder whole(0, 10000, 1000, four_bins(), {{"chA", 0, 1}, {"chB", 2, 3}});
    ReportBuilder early(0, 6000, 1000, four_bins(), {{"chA", 0, 1}, {"chB", 2, 3}});
    ReportBuilder late(6000, 10000, 1000, four_bins(), {{"chA", 0, 1}, {"chB", 2, 3}});
    for (const auto& e : fixture()) {
        whole.accumulate(e);
        (e.tStop < 6000 ? early : late).accumulate(e);
    }
    const auto direct = whole.report();
    const auto merged = merge_reports(early.report(), late.report());

    CHECK(merged.periodStartMs == 0);
    CHECK(merged.periodEndMs == 10000);
    CHECK(merged.totalTransmissions == direct.totalTransmissions);
    CHECK(merged.activeCells == direct.activeCells);
    CHECK(*merged.avgDurationMs == doctest::Approx(*direct.avgDurationMs).epsilon(kTight));
    CHECK(*merged.avgPowerDbm == doctest::Approx(*direct.avgPowerDbm).epsilon(kTight));
    CHECK(merged.occupancyFraction ==
          doctest::Approx(direct.occupancyFraction).epsilon(kTight));
    for (std::size_t i = 0; i < direct.perBin.size(); ++i) {
        CHECK(merged.perBin[i].txCount == direct.perBin[i].txCount);
        CHECK(merged.perBin[i].occupancyFraction ==
              doctest::Approx(direct.perBin[i].occupancyFraction).epsilon(kTight));
    }
    for (std::size_t i = 0; i < direct.perChannel.size(); ++i) {
        CHECK(merged.perChannel[i].second.activeCells ==
              direct.perChannel[i].second.activeCells);
    }

    // Overlapping or mismatched reports cannot merge.
    CHECK_THROWS_AS(merge_reports(direct, direct), std::invalid_argument);
    ReportBuilder other(20000, 30000, 1000, BandPlan{868.0e6, 100e3, 8});
    CHECK_THROWS_AS(merge_reports(direct, other.report()), std::invalid_argument);
}

TEST_CASE("rendering covers empty and populated reports") {
    ReportBuilder builder(0, 2000, 1000, four_bins());
    const auto empty = builder.report();
    CHECK_FALSE(empty.avgDurationMs.has_value());
    CHECK_FALSE(empty.avgPowerDbm.has_value());
    CHECK(empty.occupancyFraction == 0.0);
    const std::string emptyText = report_to_text(empty, four_bins());
    CHECK(emptyText.find("avg_duration_ms: n/a") != std::string::npos);
    CHECK(emptyText.find("avg_power_dbm: n/a") != std::string::npos);

    const auto j = report_to_json(empty, four_bins());
    CHECK(j["avgPowerDbm"].is_null());
    CHECK(j["perBin"].size() == 4);
    CHECK(j["perBin"][0]["frequencyHz"].get<double>() == doctest::Approx(868.05e6));

    ReportBuilder full(0, 10000, 1000, four_bins());
    for (const auto& e : fixture()) full.accumulate(e);
    const std::string text = report_to_text(full.report(), four_bins());
    CHECK(text.find("transmissions: 5") != std::string::npos);
    CHECK(text.find("occupancy: 0.575000") != std::string::npos);
}
