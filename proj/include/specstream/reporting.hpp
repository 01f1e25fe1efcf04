#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specstream/types.hpp"

namespace specstream {

struct OutOfPeriod : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A named contiguous bin range used for the per-channel breakdown.
struct ChannelRange {
    std::string name;
    BinIndex firstBin = 0;
    BinIndex lastBin = 0;  // inclusive
};

struct BandMetrics {
    std::int64_t txCount = 0;
    std::int64_t activeCells = 0;   // time-frequency cells covered by events
    double powerMwCells = 0.0;      // sum of event power (mW) weighted by cells
    std::optional<double> avgPowerDbm;  // derived
    double occupancyFraction = 0.0;     // derived
};

// Occupancy and power statistics over a fixed period and band, built by
// streaming events through `accumulate` in any order.
struct SpectrumReport {
    TimestampMs periodStartMs = 0;
    TimestampMs periodEndMs = 0;  // exclusive
    TimestampMs tickIntervalMs = 1;
    BinIndex binCount = 0;

    std::int64_t totalTransmissions = 0;
    double durationSumMs = 0.0;
    std::optional<double> avgDurationMs;   // derived
    std::optional<double> avgPowerDbm;     // derived
    double occupancyFraction = 0.0;        // derived
    std::int64_t activeCells = 0;
    double powerMwCells = 0.0;

    std::vector<BandMetrics> perBin;
    std::vector<std::pair<ChannelRange, BandMetrics>> perChannel;
};

// Streaming accumulator.  Events may arrive in any order; occupancy counts an
// event's bin-span × tick-span cells (overlapping events count their cells
// independently).  Power averages are linear-milliwatt means weighted by cell
// count.
class ReportBuilder {
public:
    // Period is [periodStartMs, periodEndMs), which must span a whole number
    // of ticks.  An empty channel table means each bin forms its own channel.
    ReportBuilder(TimestampMs periodStartMs, TimestampMs periodEndMs,
                  TimestampMs tickIntervalMs, const BandPlan& plan,
                  std::vector<ChannelRange> channels = {});

    void accumulate(const SpectrumEvent& ev);  // throws OutOfPeriod

    // Finalized snapshot with all derived fields filled in.
    SpectrumReport report() const;

private:
    SpectrumReport state_;
    BandPlan plan_;
};

// Count-weighted combination of reports over adjacent disjoint periods;
// equals (up to rounding) the report built over the union of events.
SpectrumReport merge_reports(const SpectrumReport& a, const SpectrumReport& b);

nlohmann::json report_to_json(const SpectrumReport& r, const BandPlan& plan);
std::string report_to_text(const SpectrumReport& r, const BandPlan& plan);

}  // namespace specstream
