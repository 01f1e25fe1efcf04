#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "specstream/types.hpp"

namespace specstream {

struct DuplicateId : std::logic_error {
    explicit DuplicateId(EventId id)
        : std::logic_error("DuplicateId: event " + std::to_string(id) +
                           " already stored") {}
};
struct UnknownField : std::invalid_argument {
    explicit UnknownField(const std::string& f)
        : std::invalid_argument("UnknownField: " + f) {}
};
struct BadQuery : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct StoredEvent {
    std::uint64_t seq = 0;
    SpectrumEvent event;
};

// Conjunction of per-field comparisons.  Fields: tStart, tStop, channelHz,
// meanPowerDbm.
struct FieldPredicate {
    std::optional<double> notEqual;
    std::optional<double> greaterThan;
    std::optional<double> lessThan;
};

struct RangeQuery {
    std::vector<std::pair<std::string, FieldPredicate>> predicates;
    void check() const;  // throws BadQuery / UnknownField
};

// Either all events within radiusMeters of center, or the `limit` nearest.
struct LocationQuery {
    GeoLocation center;
    std::optional<double> radiusMeters;
    std::optional<std::size_t> limit;
    void check() const;
};

// Spell of the query document (Listing-style JSON):
//   {"$from": "MergedTx", "tStart": {"$gt": 100}, "channelHz": {"$ne": 868.3e6}}
//   {"$from": "MergedTx", "location": {"$location": [46.0, 14.5], "$radius": 1000}}
struct QueryDocument {
    std::string from;  // store name; empty when the document omits $from
    std::variant<RangeQuery, LocationQuery> query;
};
QueryDocument parse_query(const std::string& jsonText);

double great_circle_meters(const GeoLocation& a, const GeoLocation& b);

// In-memory indexed event collection with snapshot-consistent reads.
// Inserts take the writer lock; queries share a reader lock, so a query never
// observes a half-inserted event.  Ordered-map indexes over the queryable
// fields double the linear store; range scans walk the narrowest applicable
// index and post-filter.
class EventStore {
public:
    explicit EventStore(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    std::uint64_t insert(const SpectrumEvent& ev);  // throws DuplicateId

    // Insertion-order results.
    std::vector<StoredEvent> query(const RangeQuery& q) const;

    // Ascending great-circle distance; ties by sequence number.  Events
    // without a location never match.
    std::vector<StoredEvent> query_location(const LocationQuery& q) const;

    std::vector<StoredEvent> all() const;
    std::size_t size() const;

    // True when every index holds exactly the stored sequence numbers.
    bool index_consistent() const;

    // Append-only persistence: one event record per line.
    void save_ndjson(const std::string& path) const;
    std::size_t load_ndjson(const std::string& path);  // returns events added

private:
    bool matches_locked(const SpectrumEvent& ev, const RangeQuery& q) const;
    static double field_value(const SpectrumEvent& ev, const std::string& field);

    std::string name_;
    mutable std::shared_mutex mu_;
    std::vector<StoredEvent> events_;
    std::map<EventId, std::uint64_t> byId_;
    std::map<TimestampMs, std::vector<std::uint64_t>> tStartIdx_;
    std::map<TimestampMs, std::vector<std::uint64_t>> tStopIdx_;
    std::map<double, std::vector<std::uint64_t>> channelIdx_;
    std::map<double, std::vector<std::uint64_t>> powerIdx_;
};

}  // namespace specstream
