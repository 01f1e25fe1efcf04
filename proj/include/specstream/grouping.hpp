#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "specstream/config.hpp"
#include "specstream/types.hpp"

namespace specstream {

// A tick's verdicts must all carry the same timestamp; mixing ticks would
// silently smear events across time.
struct TimestampMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// One tick's worth of adjacent active bins, fused across small frequency
// gaps.  startBin/stopBin are inclusive and always refer to active bins; the
// bridged gap bins in between are not listed as members.
struct FrequencyGroup {
    TimestampMs timestamp = 0;
    BinIndex startBin = 0;
    BinIndex stopBin = 0;
    TimestampMs earliestOnset = 0;   // min backdated onset across members
    double meanPowerDbm = 0.0;       // linear-domain mean of member levels
    std::vector<BinIndex> activeBins;
};

// Clusters one tick's verdicts along the frequency axis: active bins whose
// indices differ by at most freqGapF + 1 land in the same group.
std::vector<FrequencyGroup> group_frequency(
    const std::vector<std::optional<BinActivity>>& verdicts, int freqGapF);

// What one tick of time-grouping produced.  `opened` holds snapshots of
// events that began this tick (their tStop mirrors lastSeen so far and will
// move); `closed` holds final, immutable tuples.  Both are in ascending id
// order.
struct GroupTick {
    std::vector<SpectrumEvent> opened;
    std::vector<SpectrumEvent> closed;
};

// Stitches per-tick frequency groups into transmission events along the time
// axis.
//
// Each open event carries the frequency span of its most recent match; a
// group continues an event when the group's span, widened by the frequency
// gap allowance, still touches that span.  Every tick matches groups to open
// events one-to-one, preferring larger overlaps, so two transmitters that
// drift close together keep their separate identities instead of both
// latching onto the same event.  An event that goes unmatched for more than
// timeGapT consecutive ticks is closed with its stop set to the last tick it
// was actually seen, which keeps the reported duration independent of how
// long the grouper waited before giving up.
class TimeGrouper {
public:
    TimeGrouper(const DetectorConfig& cfg, const BandPlan& plan);

    // Feeds one tick's groups.  Ticks must be fed in time order.
    GroupTick tick(TimestampMs timestamp, const std::vector<FrequencyGroup>& groups);

    // Convenience: frequency-group the verdicts, then tick.
    GroupTick tick(TimestampMs timestamp,
                   const std::vector<std::optional<BinActivity>>& verdicts);

    // Closes everything still open (stream ended).
    std::vector<SpectrumEvent> flush();

    std::size_t openCount() const { return open_.size(); }
    EventId nextId() const { return nextId_; }

private:
    struct OpenEvent {
        EventId id = 0;
        TimestampMs tStart = 0;
        TimestampMs lastSeen = 0;
        BinIndex curStart = 0, curStop = 0;      // span of the latest match
        BinIndex unionStart = 0, unionStop = 0;  // span over the whole life
        int silentTicks = 0;
        double sumMw = 0.0;        // power accumulation across member cells
        std::int64_t cells = 0;
    };

    SpectrumEvent snapshot(const OpenEvent& e) const;

    DetectorConfig cfg_;
    BandPlan plan_;
    std::vector<OpenEvent> open_;
    EventId nextId_ = 0;
};

}  // namespace specstream
