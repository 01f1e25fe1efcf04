#include "specstream/event_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>

#include <nlohmann/json.hpp>

#include "specstream/event_json.hpp"

namespace specstream {

using nlohmann::json;

namespace {

const char* const kQueryableFields[] = {"tStart", "tStop", "channelHz", "meanPowerDbm"};

bool queryable(const std::string& field) {
    for (const char* f : kQueryableFields) {
        if (field == f) return true;
    }
    return false;
}

}  // namespace

void RangeQuery::check() const {
    if (predicates.empty()) throw BadQuery("query needs at least one predicate");
    for (const auto& [field, pred] : predicates) {
        if (!queryable(field)) throw UnknownField(field);
        if (!pred.notEqual && !pred.greaterThan && !pred.lessThan) {
            throw BadQuery("predicate on " + field + " has no comparison");
        }
    }
}

void LocationQuery::check() const {
    if (radiusMeters.has_value() == limit.has_value()) {
        throw BadQuery("location query needs exactly one of $radius / $limit");
    }
    if (radiusMeters && !(*radiusMeters > 0.0)) throw BadQuery("$radius must be > 0");
    if (limit && *limit < 1) throw BadQuery("$limit must be >= 1");
}

QueryDocument parse_query(const std::string& jsonText) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::parse_error& e) {
        throw BadQuery(std::string("query is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw BadQuery("query must be a JSON object");

    QueryDocument out;
    RangeQuery range;
    std::optional<LocationQuery> location;

    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& key = it.key();
        if (key == "$from") {
            out.from = it->get<std::string>();
            continue;
        }
        if (!it->is_object()) {
            throw BadQuery("field " + key + " must map to an operator object");
        }
        if (it->contains("$location")) {
            if (key != "location") throw UnknownField(key);
            LocationQuery lq;
            const auto& c = (*it)["$location"];
            if (!c.is_array() || c.size() != 2) {
                throw BadQuery("$location must be [latitude, longitude]");
            }
            lq.center = {c[0].get<double>(), c[1].get<double>()};
            if (it->contains("$radius")) lq.radiusMeters = (*it)["$radius"].get<double>();
            if (it->contains("$limit")) lq.limit = (*it)["$limit"].get<std::size_t>();
            lq.check();
            location = lq;
            continue;
        }
        FieldPredicate pred;
        for (auto op = it->begin(); op != it->end(); ++op) {
            if (op.key() == "$ne") {
                pred.notEqual = op->get<double>();
            } else if (op.key() == "$gt") {
                pred.greaterThan = op->get<double>();
            } else if (op.key() == "$lt") {
                pred.lessThan = op->get<double>();
            } else {
                throw BadQuery("unknown operator " + op.key());
            }
        }
        range.predicates.emplace_back(key, pred);
    }

    if (location && !range.predicates.empty()) {
        throw BadQuery("cannot mix range and location constraints in one query");
    }
    if (location) {
        out.query = *location;
    } else {
        range.check();
        out.query = range;
    }
    return out;
}

double great_circle_meters(const GeoLocation& a, const GeoLocation& b) {
    constexpr double kEarthRadiusM = 6371008.8;
    constexpr double kDegToRad = std::numbers::pi / 180.0;
    const double phi1 = a.latitude * kDegToRad;
    const double phi2 = b.latitude * kDegToRad;
    const double dPhi = (b.latitude - a.latitude) * kDegToRad;
    const double dLam = (b.longitude - a.longitude) * kDegToRad;
    const double s = std::sin(0.5 * dPhi);
    const double t = std::sin(0.5 * dLam);
    const double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double EventStore::field_value(const SpectrumEvent& ev, const std::string& field) {
    if (field == "tStart") return static_cast<double>(ev.tStart);
    if (field == "tStop") return static_cast<double>(ev.tStop);
    if (field == "channelHz") return ev.channelHz;
    if (field == "meanPowerDbm") return ev.meanPowerDbm;
    throw UnknownField(field);
}

std::uint64_t EventStore::insert(const SpectrumEvent& ev) {
    std::unique_lock lock(mu_);
    if (byId_.count(ev.id)) throw DuplicateId(ev.id);
    const std::uint64_t seq = events_.size();
    events_.push_back({seq, ev});
    byId_[ev.id] = seq;
    tStartIdx_[ev.tStart].push_back(seq);
    tStopIdx_[ev.tStop].push_back(seq);
    channelIdx_[ev.channelHz].push_back(seq);
    powerIdx_[ev.meanPowerDbm].push_back(seq);
    return seq;
}

bool EventStore::matches_locked(const SpectrumEvent& ev, const RangeQuery& q) const {
    for (const auto& [field, pred] : q.predicates) {
        const double v = field_value(ev, field);
        if (pred.notEqual && v == *pred.notEqual) return false;
        if (pred.greaterThan && !(v > *pred.greaterThan)) return false;
        if (pred.lessThan && !(v < *pred.lessThan)) return false;
    }
    return true;
}

std::vector<StoredEvent> EventStore::query(const RangeQuery& q) const {
    q.check();
    std::shared_lock lock(mu_);

    // Walk the narrowest index range available, then post-filter the full
    // conjunction; fall back to a linear scan for pure $ne queries.
    std::vector<std::uint64_t> candidates;
    bool haveCandidates = false;
    for (const auto& [field, pred] : q.predicates) {
        if (!pred.greaterThan && !pred.lessThan) continue;
        auto scanInt = [&](const std::map<TimestampMs, std::vector<std::uint64_t>>& idx) {
            // Contradictory bounds select an empty key range; bail before the
            // begin iterator can land past the end iterator.
            if (pred.greaterThan && pred.lessThan &&
                std::floor(*pred.greaterThan) + 1.0 >= std::ceil(*pred.lessThan)) {
                return;
            }
            auto begin = idx.begin();
            auto end = idx.end();
            if (pred.greaterThan) {
                const auto kmin =
                    static_cast<TimestampMs>(std::floor(*pred.greaterThan)) + 1;
                begin = idx.lower_bound(kmin);
            }
            if (pred.lessThan) end = idx.lower_bound(
                static_cast<TimestampMs>(std::ceil(*pred.lessThan)));
            for (auto it = begin; it != end; ++it) {
                for (auto s : it->second) candidates.push_back(s);
            }
        };
        auto scanReal = [&](const std::map<double, std::vector<std::uint64_t>>& idx) {
            if (pred.greaterThan && pred.lessThan &&
                *pred.greaterThan >= *pred.lessThan) {
                return;
            }
            auto begin = pred.greaterThan ? idx.upper_bound(*pred.greaterThan)
                                          : idx.begin();
            auto end = pred.lessThan ? idx.lower_bound(*pred.lessThan) : idx.end();
            for (auto it = begin; it != end; ++it) {
                for (auto s : it->second) candidates.push_back(s);
            }
        };
        if (field == "tStart") {
            scanInt(tStartIdx_);
        } else if (field == "tStop") {
            scanInt(tStopIdx_);
        } else if (field == "channelHz") {
            scanReal(channelIdx_);
        } else {
            scanReal(powerIdx_);
        }
        haveCandidates = true;
        break;
    }

    std::vector<StoredEvent> out;
    if (haveCandidates) {
        std::sort(candidates.begin(), candidates.end());
        for (auto s : candidates) {
            const StoredEvent& se = events_[s];
            if (matches_locked(se.event, q)) out.push_back(se);
        }
    } else {
        for (const StoredEvent& se : events_) {
            if (matches_locked(se.event, q)) out.push_back(se);
        }
    }
    return out;
}

std::vector<StoredEvent> EventStore::query_location(const LocationQuery& q) const {
    q.check();
    std::shared_lock lock(mu_);

    struct Hit {
        double distance;
        std::uint64_t seq;
    };
    std::vector<Hit> hits;
    for (const StoredEvent& se : events_) {
        if (!se.event.location) continue;
        const double d = great_circle_meters(q.center, *se.event.location);
        if (q.radiusMeters && d > *q.radiusMeters) continue;
        hits.push_back({d, se.seq});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.seq < b.seq;
    });
    if (q.limit && hits.size() > *q.limit) hits.resize(*q.limit);

    std::vector<StoredEvent> out;
    out.reserve(hits.size());
    for (const Hit& h : hits) out.push_back(events_[h.seq]);
    return out;
}

std::vector<StoredEvent> EventStore::all() const {
    std::shared_lock lock(mu_);
    return events_;
}

std::size_t EventStore::size() const {
    std::shared_lock lock(mu_);
    return events_.size();
}

bool EventStore::index_consistent() const {
    std::shared_lock lock(mu_);
    auto gather = [&](const auto& idx) {
        std::vector<std::uint64_t> seqs;
        for (const auto& [key, list] : idx) {
            (void)key;
            seqs.insert(seqs.end(), list.begin(), list.end());
        }
        std::sort(seqs.begin(), seqs.end());
        return seqs;
    };
    std::vector<std::uint64_t> expect(events_.size());
    for (std::uint64_t i = 0; i < events_.size(); ++i) expect[i] = i;
    return gather(tStartIdx_) == expect && gather(tStopIdx_) == expect &&
           gather(channelIdx_) == expect && gather(powerIdx_) == expect &&
           byId_.size() == events_.size();
}

void EventStore::save_ndjson(const std::string& path) const {
    std::shared_lock lock(mu_);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const StoredEvent& se : events_) {
        out << event_to_json(se.event).dump() << '\n';
    }
}

std::size_t EventStore::load_ndjson(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string line;
    std::size_t added = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        insert(event_from_json(json::parse(line)));
        ++added;
    }
    return added;
}

}  // namespace specstream
