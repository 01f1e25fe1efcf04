#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "specstream/event_store.hpp"

#include "store_oracle.hpp"

using namespace specstream;
using namespace specstream::testing;

namespace {

SpectrumEvent simple_event(EventId id, TimestampMs tStart, double channelHz,
                           double powerDbm) {
    SpectrumEvent ev;
    ev.id = id;
    ev.tStart = tStart;
    ev.tStop = tStart + 1000;
    ev.channelHz = channelHz;
    ev.meanPowerDbm = powerDbm;
    return ev;
}

}  // namespace

TEST_CASE("inserts are sequenced and duplicate ids rejected") {
    EventStore store("MergedTx");
    CHECK(store.insert(simple_event(7, 0, 868.1e6, -60)) == 0);
    CHECK(store.insert(simple_event(8, 100, 868.2e6, -61)) == 1);
    CHECK(store.insert(simple_event(9, 200, 868.3e6, -62)) == 2);
    CHECK_THROWS_AS(store.insert(simple_event(8, 999, 868.9e6, -50)), DuplicateId);
    CHECK(store.size() == 3);
    CHECK(store.index_consistent());

    const auto rows = store.all();
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].event.id == 7);
    CHECK(rows[2].event.id == 9);
}

TEST_CASE("range query semantics on a hand-built store") {
    EventStore store("MergedTx");
    store.insert(simple_event(1, 0, 868.1e6, -70));
    store.insert(simple_event(2, 100, 868.2e6, -60));
    store.insert(simple_event(3, 200, 868.2e6, -50));

    SUBCASE("open interval on tStart") {
        RangeQuery q;
        q.predicates.emplace_back("tStart",
                                  FieldPredicate{std::nullopt, 0.0, 200.0});
        const auto rows = store.query(q);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].event.id == 2);  // strict in both directions
    }
    SUBCASE("not-equal excludes exact values only") {
        RangeQuery q;
        q.predicates.emplace_back("channelHz",
                                  FieldPredicate{868.2e6, std::nullopt, std::nullopt});
        const auto rows = store.query(q);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].event.id == 1);
    }
    SUBCASE("conjunction across fields") {
        RangeQuery q;
        q.predicates.emplace_back("meanPowerDbm",
                                  FieldPredicate{std::nullopt, -65.0, std::nullopt});
        q.predicates.emplace_back("tStart",
                                  FieldPredicate{std::nullopt, std::nullopt, 150.0});
        const auto rows = store.query(q);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].event.id == 2);
    }
    SUBCASE("ill-formed queries are refused") {
        RangeQuery empty;
        CHECK_THROWS_AS(store.query(empty), BadQuery);
        RangeQuery unknown;
        unknown.predicates.emplace_back("bandwidth",
                                        FieldPredicate{std::nullopt, 0.0, std::nullopt});
        CHECK_THROWS_AS(store.query(unknown), UnknownField);
        RangeQuery noOp;
        noOp.predicates.emplace_back("tStart", FieldPredicate{});
        CHECK_THROWS_AS(store.query(noOp), BadQuery);
    }
}

TEST_CASE("location query orders by distance with sequence ties") {
    EventStore store("MergedTx");
    auto at = [](EventId id, double lat, double lon) {
        SpectrumEvent ev;
        ev.id = id;
        ev.location = GeoLocation{lat, lon};
        return ev;
    };
    store.insert(at(1, 46.20, 14.50));
    store.insert(at(2, 46.05, 14.50));  // nearest
    store.insert(at(3, 46.20, 14.50));  // same spot as id 1 -> tie, later seq
    SpectrumEvent nowhere;
    nowhere.id = 4;  // no location: can never match
    store.insert(nowhere);

    LocationQuery q;
    q.center = {46.0, 14.5};
    q.limit = 10;
    const auto rows = store.query_location(q);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].event.id == 2);
    CHECK(rows[1].event.id == 1);  // tie with id 3 broken by insertion order
    CHECK(rows[2].event.id == 3);

    q.limit = 2;
    CHECK(store.query_location(q).size() == 2);

    q.limit.reset();
    q.radiusMeters = great_circle_meters({46.0, 14.5}, {46.05, 14.5}) + 1.0;
    const auto near = store.query_location(q);
    REQUIRE(near.size() == 1);
    CHECK(near[0].event.id == 2);
}

TEST_CASE("query documents parse into typed queries") {
    SUBCASE("range spelling") {
        const auto doc = parse_query(
            R"({"$from": "MergedTx", "tStart": {"$gt": 100}, "channelHz": {"$ne": 868.3e6}})");
        CHECK(doc.from == "MergedTx");
        const auto& q = std::get<RangeQuery>(doc.query);
        REQUIRE(q.predicates.size() == 2);
    }
    SUBCASE("location spelling with radius") {
        const auto doc = parse_query(
            R"({"$from": "MergedTx", "location": {"$location": [46.0, 14.5], "$radius": 1000}})");
        const auto& q = std::get<LocationQuery>(doc.query);
        CHECK(q.center.latitude == doctest::Approx(46.0));
        CHECK(q.radiusMeters == doctest::Approx(1000.0));
        CHECK_FALSE(q.limit.has_value());
    }
    SUBCASE("location spelling with limit") {
        const auto doc =
            parse_query(R"({"location": {"$location": [0, 0], "$limit": 5}})");
        CHECK(std::get<LocationQuery>(doc.query).limit == 5);
    }
    SUBCASE("rejections") {
        CHECK_THROWS_AS(parse_query("not json"), BadQuery);
        CHECK_THROWS_AS(parse_query("[1,2]"), BadQuery);
        CHECK_THROWS_AS(parse_query("{}"), BadQuery);
        CHECK_THROWS_AS(parse_query(R"({"tStart": {"$gte": 1}})"), BadQuery);
        CHECK_THROWS_AS(parse_query(R"({"bandwidth": {"$gt": 1}})"), UnknownField);
        CHECK_THROWS_AS(parse_query(R"({"tStart": 5})"), BadQuery);
        // radius and limit are mutually exclusive, and one is required
        CHECK_THROWS_AS(
            parse_query(R"({"location": {"$location": [0,0], "$radius": 1, "$limit": 1}})"),
            BadQuery);
        CHECK_THROWS_AS(parse_query(R"({"location": {"$location": [0,0]}})"), BadQuery);
        CHECK_THROWS_AS(
            parse_query(R"({"location": {"$location": [0,0], "$radius": -5}})"), BadQuery);
        CHECK_THROWS_AS(
            parse_query(R"({"location": {"$location": [0,0], "$limit": 0}})"), BadQuery);
        CHECK_THROWS_AS(
            parse_query(R"({"location": {"$location": [0], "$radius": 1}})"), BadQuery);
        // mixing a field predicate with a location constraint
        CHECK_THROWS_AS(
            parse_query(
                R"({"tStart": {"$gt": 0}, "location": {"$location": [0,0], "$radius": 1}})"),
            BadQuery);
    }
}

TEST_CASE("indexed queries agree with a linear scan on random workloads") {
    std::mt19937 rng(4242);
    EventStore store("MergedTx");
    std::vector<SpectrumEvent> shadow;
    for (EventId i = 0; i < 2000; ++i) {
        auto ev = random_store_event(rng, i + 1);
        store.insert(ev);
        shadow.push_back(ev);
    }
    REQUIRE(store.index_consistent());

    for (int i = 0; i < 60; ++i) {
        const auto q = random_range_query(rng);
        CHECK(seqs_of(store.query(q)) == oracle_range(shadow, q));
    }
    for (int i = 0; i < 60; ++i) {
        const auto q = random_location_query(rng);
        CHECK(seqs_of(store.query_location(q)) == oracle_location(shadow, q));
    }
}

TEST_CASE("events survive an ndjson round trip") {
    std::mt19937 rng(99);
    EventStore store("MergedTx");
    for (EventId i = 0; i < 50; ++i) store.insert(random_store_event(rng, i + 1));

    const std::string path = "store_roundtrip.ndjson";
    store.save_ndjson(path);
    EventStore restored("MergedTx");
    CHECK(restored.load_ndjson(path) == 50);
    std::remove(path.c_str());

    const auto a = store.all();
    const auto b = restored.all();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a[i].event;
        const auto& y = b[i].event;
        CHECK(x.id == y.id);
        CHECK(x.tStart == y.tStart);
        CHECK(x.tStop == y.tStop);
        CHECK(x.fStartBin == y.fStartBin);
        CHECK(x.fStopBin == y.fStopBin);
        CHECK(x.fStartHz == doctest::Approx(y.fStartHz));
        CHECK(x.fStopHz == doctest::Approx(y.fStopHz));
        CHECK(x.channelHz == doctest::Approx(y.channelHz));
        CHECK(x.meanPowerDbm == doctest::Approx(y.meanPowerDbm));
        REQUIRE(x.location.has_value() == y.location.has_value());
        if (x.location) {
            CHECK(x.location->latitude == doctest::Approx(y.location->latitude));
            CHECK(x.location->longitude == doctest::Approx(y.location->longitude));
        }
    }
    CHECK(restored.index_consistent());
    CHECK_THROWS_AS(restored.load_ndjson("no_such_file.ndjson"), IoError);
}

TEST_CASE("queries stay consistent while a writer is inserting") {
    EventStore store("MergedTx");
    std::atomic<bool> done{false};
    std::atomic<int> failures{0};

    std::vector<std::thread> readers;
    for (int r = 0; r < 3; ++r) {
        readers.emplace_back([&] {
            std::mt19937 rng(1000 + r);
            while (!done.load()) {
                const auto q = random_range_query(rng);
                const auto rows = store.query(q);
                // Snapshot reads: sequences are unique, ordered, and dense
                // enough to have existed at some store size.
                for (std::size_t i = 1; i < rows.size(); ++i) {
                    if (rows[i - 1].seq >= rows[i].seq) failures.fetch_add(1);
                }
                LocationQuery lq;
                lq.center = {46.0, 14.5};
                lq.limit = 5;
                if (store.query_location(lq).size() > 5) failures.fetch_add(1);
            }
        });
    }

    std::mt19937 rng(7);
    for (EventId i = 0; i < 2000; ++i) store.insert(random_store_event(rng, i + 1));
    done.store(true);
    for (auto& t : readers) t.join();

    CHECK(failures.load() == 0);
    CHECK(store.size() == 2000);
    CHECK(store.index_consistent());
}
