#include "specstream/detector.hpp"

#include <algorithm>
#include <cassert>

namespace specstream {

BinDetector::BinDetector(BinIndex binIndex, const DetectorConfig& cfg)
    : binIndex_(binIndex),
      cfg_(cfg),
      recent_(static_cast<std::size_t>(cfg.recentWinSize)),
      historic_(static_cast<std::size_t>(cfg.historicWinSize)),
      recentHist_(cfg.numHistBins, cfg.addOverflowBins),
      historicHist_(cfg.numHistBins, cfg.addOverflowBins) {}

double BinDetector::supportThreshold(double historicMean, double level) const {
    return historicMean + std::max(cfg_.marginDb, 0.5 * (level - historicMean));
}

TimestampMs BinDetector::backdatedOnset(double threshold) const {
    // Earliest entry of the unbroken above-threshold run that ends at the
    // newest entry.  The change test needs a few readings before it trips, so
    // the raw readings recover the ticks it arrived late by.
    std::optional<TimestampMs> runStart;
    TimestampMs newest = 0;
    recent_.for_each([&](const WindowEntry& e) {
        newest = e.timestamp;
        if (static_cast<double>(e.value) > threshold) {
            if (!runStart) runStart = e.timestamp;
        } else {
            runStart.reset();
        }
    });
    // The entry pushed this tick normally exceeds the threshold; if it only
    // ties it, the onset is simply this tick.
    return runStart.value_or(newest);
}

std::optional<BinActivity> BinDetector::tick(TimestampMs timestamp, float value,
                                             std::int32_t cell,
                                             std::vector<double>& scratch,
                                             const Kernels& kernels) {
    ++ticksSeen_;

    // Route the reading through the windows first.  Historic intake is keyed
    // to the phase *before* this tick's verdict so the decision cannot depend
    // on data it is about to produce.
    const bool frozenHistoric = engaged();
    recentHist_.add(cell);
    if (auto evicted = recent_.push({timestamp, value, cell})) {
        recentHist_.remove(evicted->cell);
        if (!frozenHistoric) {
            if (auto aged = historic_.push(*evicted)) {
                historicHist_.remove(aged->cell);
            }
            historicHist_.add(evicted->cell);
        }
    }

    if (ticksSeen_ < cfg_.warmupSamples) return std::nullopt;

    const double recentMean = recent_.mean();
    const double historicMean = historic_.mean();
    const ChiSquareResult chi =
        chi_square_compare(recentHist_, historicHist_, scratch, kernels);
    const double p = chi_square_pvalue(chi.statistic, chi.dof);

    const bool formulaActive =
        p < cfg_.alpha && recentMean > historicMean + cfg_.marginDb;
    const double v = static_cast<double>(value);

    bool reported = false;
    switch (phase_) {
        case Phase::Idle:
            if (formulaActive) {
                const double onsetThreshold = std::max(
                    historicMean + cfg_.marginDb, 0.5 * (historicMean + v));
                // A distribution shift whose current reading is itself at the
                // noise floor is not a transmission starting now — it is the
                // residue of one that already ended (or a chance histogram
                // wobble).  Engage only when the live reading backs it up.
                if (v > onsetThreshold) {
                    onsetTimestamp_ = backdatedOnset(onsetThreshold);
                    episodeLevel_ = v;
                    phase_ = Phase::Active;
                    reported = true;
                }
            }
            break;
        case Phase::Active:
            if (formulaActive && v > supportThreshold(historicMean, episodeLevel_)) {
                episodeLevel_ += 0.25 * (v - episodeLevel_);
                reported = true;
            } else if (recentMean <= historicMean + cfg_.marginDb) {
                phase_ = Phase::Idle;
            } else {
                phase_ = Phase::Washout;
            }
            break;
        case Phase::Washout:
            // The episode's samples are still draining out of the recent
            // window; the significance test cannot be trusted to stay down
            // until the recent mean itself is back in the noise band.  Only a
            // reading strong enough to clear the support threshold (a genuine
            // new burst) re-engages early.
            if (formulaActive && v > supportThreshold(historicMean, episodeLevel_)) {
                const double onsetThreshold = std::max(
                    historicMean + cfg_.marginDb, 0.5 * (historicMean + v));
                onsetTimestamp_ = backdatedOnset(onsetThreshold);
                episodeLevel_ = v;
                phase_ = Phase::Active;
                reported = true;
            } else if (recentMean <= historicMean + cfg_.marginDb) {
                phase_ = Phase::Idle;
            }
            break;
    }

    BinActivity a;
    a.binIndex = binIndex_;
    a.timestamp = timestamp;
    a.active = reported;
    a.pValue = p;
    a.chiSquareStat = chi.statistic;
    a.recentMean = recentMean;
    a.historicMean = historicMean;
    if (recentMean > historicMean + cfg_.marginDb) {
        a.direction = Direction::Rising;
    } else if (recentMean < historicMean - cfg_.marginDb) {
        a.direction = Direction::Falling;
    } else {
        a.direction = Direction::Flat;
    }
    a.onsetTimestamp = reported ? onsetTimestamp_ : timestamp;
    return a;
}

DetectorBank::DetectorBank(BinIndex binCount, const DetectorConfig& cfg) : cfg_(cfg) {
    cfg_.check();
    detectors_.reserve(static_cast<std::size_t>(binCount));
    for (BinIndex i = 0; i < binCount; ++i) detectors_.emplace_back(i, cfg_);
}

void DetectorBank::tick_range(BinIndex firstBin, BinIndex lastBin,
                              TimestampMs timestamp, const float* values,
                              const std::int32_t* cells,
                              std::optional<BinActivity>* out,
                              std::vector<double>& scratch, const Kernels& kernels) {
    assert(firstBin >= 0 && lastBin <= binCount() && firstBin <= lastBin);
    for (BinIndex b = firstBin; b < lastBin; ++b) {
        out[b] = detectors_[static_cast<std::size_t>(b)].tick(
            timestamp, values[b], cells[b], scratch, kernels);
    }
}

std::vector<std::optional<BinActivity>> DetectorBank::tick(const PsdSample& sample,
                                                           const std::int32_t* cells) {
    std::vector<std::optional<BinActivity>> out(detectors_.size());
    tick_range(0, binCount(), sample.timestamp, sample.values.data(), cells,
               out.data(), scratch_, active_kernels());
    return out;
}

}  // namespace specstream
