#pragma once

#include <vector>

#include "specstream/types.hpp"

namespace specstream::testing {

// Turns an activity mask for one tick into the verdict vector the grouper
// consumes.  Onsets default to the tick itself (no backdating), so grouped
// events start exactly where the mask says they do.
inline std::vector<std::optional<BinActivity>> verdicts_from_mask(
    const std::vector<bool>& mask, TimestampMs timestamp, double levelDbm = -60.0) {
    std::vector<std::optional<BinActivity>> out(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        BinActivity a;
        a.binIndex = static_cast<BinIndex>(i);
        a.timestamp = timestamp;
        a.active = mask[i];
        a.pValue = mask[i] ? 1e-6 : 0.9;
        a.chiSquareStat = mask[i] ? 50.0 : 0.1;
        a.recentMean = mask[i] ? levelDbm : -90.0;
        a.historicMean = -90.0;
        a.direction = mask[i] ? Direction::Rising : Direction::Flat;
        a.onsetTimestamp = timestamp;
        out[i] = a;
    }
    return out;
}

inline BandPlan test_plan(BinIndex binCount, double startHz = 868.0e6,
                          double widthHz = 1000.0) {
    BandPlan plan;
    plan.startFrequencyHz = startHz;
    plan.binWidthHz = widthHz;
    plan.binCount = binCount;
    return plan;
}

}  // namespace specstream::testing
