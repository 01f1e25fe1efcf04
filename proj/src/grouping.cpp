#include "specstream/grouping.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace specstream {

std::vector<FrequencyGroup> group_frequency(
    const std::vector<std::optional<BinActivity>>& verdicts, int freqGapF) {
    std::optional<TimestampMs> tickStamp;
    for (const auto& v : verdicts) {
        if (!v) continue;
        if (!tickStamp) {
            tickStamp = v->timestamp;
        } else if (*tickStamp != v->timestamp) {
            throw TimestampMismatch("verdicts from different ticks in one grouping call");
        }
    }

    std::vector<FrequencyGroup> groups;
    FrequencyGroup* current = nullptr;
    BinIndex lastActive = 0;
    double sumMw = 0.0;

    auto finish = [&] {
        if (current) {
            current->meanPowerDbm =
                mw_to_dbm(sumMw / static_cast<double>(current->activeBins.size()));
            current = nullptr;
        }
    };

    for (BinIndex b = 0; b < static_cast<BinIndex>(verdicts.size()); ++b) {
        const auto& v = verdicts[static_cast<std::size_t>(b)];
        if (!v || !v->active) continue;
        if (current && b - lastActive > freqGapF + 1) finish();
        if (!current) {
            groups.push_back({});
            current = &groups.back();
            current->timestamp = v->timestamp;
            current->startBin = b;
            current->earliestOnset = v->onsetTimestamp;
            sumMw = 0.0;
        }
        current->stopBin = b;
        current->earliestOnset = std::min(current->earliestOnset, v->onsetTimestamp);
        current->activeBins.push_back(b);
        sumMw += dbm_to_mw(v->recentMean);
        lastActive = b;
    }
    finish();
    return groups;
}

TimeGrouper::TimeGrouper(const DetectorConfig& cfg, const BandPlan& plan)
    : cfg_(cfg), plan_(plan) {}

SpectrumEvent TimeGrouper::snapshot(const OpenEvent& e) const {
    SpectrumEvent ev;
    ev.id = e.id;
    ev.tStart = e.tStart;
    ev.tStop = e.lastSeen;
    ev.fStartBin = e.unionStart;
    ev.fStopBin = e.unionStop;
    ev.fStartHz = plan_.startFrequencyHz + e.unionStart * plan_.binWidthHz;
    ev.fStopHz = plan_.startFrequencyHz + (e.unionStop + 1) * plan_.binWidthHz;
    ev.channelHz = plan_.frequencyOf((e.unionStart + e.unionStop) / 2);
    ev.meanPowerDbm = e.cells > 0 ? mw_to_dbm(e.sumMw / static_cast<double>(e.cells))
                                  : -std::numeric_limits<double>::infinity();
    return ev;
}

GroupTick TimeGrouper::tick(TimestampMs timestamp,
                            const std::vector<FrequencyGroup>& groups) {
    // Candidate (event, group) pairs whose spans touch once the group is
    // widened by the gap allowance.
    struct Candidate {
        BinIndex overlap;
        std::size_t eventIdx;
        std::size_t groupIdx;
    };
    std::vector<Candidate> candidates;
    for (std::size_t ei = 0; ei < open_.size(); ++ei) {
        const OpenEvent& e = open_[ei];
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const FrequencyGroup& g = groups[gi];
            const BinIndex lo = std::max(e.curStart, g.startBin - cfg_.freqGapF);
            const BinIndex hi = std::min(e.curStop, g.stopBin + cfg_.freqGapF);
            const BinIndex overlap = hi - lo + 1;
            if (overlap >= 1) candidates.push_back({overlap, ei, gi});
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](const Candidate& a, const Candidate& b) {
                  if (a.overlap != b.overlap) return a.overlap > b.overlap;
                  const BinIndex ea = open_[a.eventIdx].curStart;
                  const BinIndex eb = open_[b.eventIdx].curStart;
                  if (ea != eb) return ea < eb;
                  const BinIndex ga = groups[a.groupIdx].startBin;
                  const BinIndex gb = groups[b.groupIdx].startBin;
                  if (ga != gb) return ga < gb;
                  return open_[a.eventIdx].id < open_[b.eventIdx].id;
              });

    const std::size_t preexisting = open_.size();
    std::vector<bool> eventTaken(preexisting, false);
    std::vector<bool> groupTaken(groups.size(), false);
    for (const Candidate& c : candidates) {
        if (eventTaken[c.eventIdx] || groupTaken[c.groupIdx]) continue;
        eventTaken[c.eventIdx] = true;
        groupTaken[c.groupIdx] = true;
        OpenEvent& e = open_[c.eventIdx];
        const FrequencyGroup& g = groups[c.groupIdx];
        e.lastSeen = timestamp;
        e.curStart = g.startBin;
        e.curStop = g.stopBin;
        e.unionStart = std::min(e.unionStart, g.startBin);
        e.unionStop = std::max(e.unionStop, g.stopBin);
        e.silentTicks = 0;
        e.sumMw += dbm_to_mw(g.meanPowerDbm) * static_cast<double>(g.activeBins.size());
        e.cells += static_cast<std::int64_t>(g.activeBins.size());
    }

    GroupTick result;

    // Unmatched groups begin new events, in frequency order.
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        if (groupTaken[gi]) continue;
        const FrequencyGroup& g = groups[gi];
        OpenEvent e;
        e.id = nextId_++;
        e.tStart = g.earliestOnset;
        e.lastSeen = timestamp;
        e.curStart = e.unionStart = g.startBin;
        e.curStop = e.unionStop = g.stopBin;
        e.sumMw = dbm_to_mw(g.meanPowerDbm) * static_cast<double>(g.activeBins.size());
        e.cells = static_cast<std::int64_t>(g.activeBins.size());
        open_.push_back(e);
        result.opened.push_back(snapshot(e));
    }

    // Unmatched events age; the stale ones close with the stop time of their
    // last actual sighting.
    std::vector<OpenEvent> still;
    still.reserve(open_.size());
    for (std::size_t ei = 0; ei < open_.size(); ++ei) {
        OpenEvent& e = open_[ei];
        const bool matchedNow =
            (ei < preexisting && eventTaken[ei]) || e.lastSeen == timestamp;
        if (!matchedNow) {
            ++e.silentTicks;
            if (e.silentTicks > cfg_.timeGapT) {
                result.closed.push_back(snapshot(e));
                continue;
            }
        }
        still.push_back(std::move(e));
    }
    open_ = std::move(still);
    auto byId = [](const SpectrumEvent& a, const SpectrumEvent& b) { return a.id < b.id; };
    std::sort(result.closed.begin(), result.closed.end(), byId);
    std::sort(result.opened.begin(), result.opened.end(), byId);
    return result;
}

GroupTick TimeGrouper::tick(TimestampMs timestamp,
                            const std::vector<std::optional<BinActivity>>& verdicts) {
    return tick(timestamp, group_frequency(verdicts, cfg_.freqGapF));
}

std::vector<SpectrumEvent> TimeGrouper::flush() {
    std::vector<SpectrumEvent> closed;
    closed.reserve(open_.size());
    for (const OpenEvent& e : open_) closed.push_back(snapshot(e));
    open_.clear();
    std::sort(closed.begin(), closed.end(),
              [](const SpectrumEvent& a, const SpectrumEvent& b) { return a.id < b.id; });
    return closed;
}

}  // namespace specstream
