#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "specstream/chi_square.hpp"
#include "specstream/config.hpp"
#include "specstream/histogram.hpp"
#include "specstream/kernels.hpp"
#include "specstream/types.hpp"
#include "specstream/window.hpp"

namespace specstream {

// Change detector for a single frequency bin.
//
// Each tick flows through a short recent window and on into a long historic
// window; the two are compared as histograms with a chi-square test.  A bin
// is reported active while (a) the recent distribution differs significantly
// from the historic one, (b) the recent mean sits above the historic mean by
// the configured margin, and (c) the instantaneous reading still supports an
// ongoing episode.
//
// Condition (c) exists because a windowed test is sluggish on the falling
// edge: once a transmitter stops, its samples linger in the recent window
// for a full window length and (a)+(b) alone would stretch the reported stop
// time by roughly that much.  The instantaneous reading is compared against
// a threshold halfway between the historic noise level and the episode's
// tracked level, so the reported activity drops within a tick or two of the
// transmitter actually stopping, while (a) and (b) keep ruling out noise.
//
// While an episode is in flight (including the washout phase after the
// support drops), evictions from the recent window are discarded instead of
// entering the historic window, so the historic window keeps describing the
// pre-episode noise floor rather than absorbing the episode itself.
class BinDetector {
public:
    BinDetector(BinIndex binIndex, const DetectorConfig& cfg);

    // Feeds one reading (already validated and quantized).  Returns the
    // verdict for this tick, or nullopt while the detector is still warming
    // up.  `scratch` is shared chi-square workspace owned by the caller.
    std::optional<BinActivity> tick(TimestampMs timestamp, float value,
                                    std::int32_t cell, std::vector<double>& scratch,
                                    const Kernels& kernels);

    std::int64_t ticksSeen() const { return ticksSeen_; }

private:
    enum class Phase {
        Idle,     // tracking noise
        Active,   // episode in progress, reported active
        Washout,  // episode over, waiting for its samples to leave the recent window
    };

    bool engaged() const { return phase_ != Phase::Idle; }
    double supportThreshold(double historicMean, double level) const;
    TimestampMs backdatedOnset(double threshold) const;

    BinIndex binIndex_;
    DetectorConfig cfg_;
    SlidingWindow recent_;
    SlidingWindow historic_;
    OnlineHistogram recentHist_;
    OnlineHistogram historicHist_;
    std::int64_t ticksSeen_ = 0;
    Phase phase_ = Phase::Idle;
    double episodeLevel_ = 0.0;
    TimestampMs onsetTimestamp_ = 0;
};

// The detectors for every bin of a band, tickable over sub-ranges so worker
// threads can each own a contiguous slice without sharing any mutable state.
class DetectorBank {
public:
    DetectorBank(BinIndex binCount, const DetectorConfig& cfg);

    // Runs bins [firstBin, lastBin) against one tick's readings/cells and
    // writes verdicts into out[firstBin..lastBin).  `out` must span all bins.
    void tick_range(BinIndex firstBin, BinIndex lastBin, TimestampMs timestamp,
                    const float* values, const std::int32_t* cells,
                    std::optional<BinActivity>* out, std::vector<double>& scratch,
                    const Kernels& kernels);

    // Single-threaded convenience over the full band.
    std::vector<std::optional<BinActivity>> tick(const PsdSample& sample,
                                                 const std::int32_t* cells);

    BinIndex binCount() const { return static_cast<BinIndex>(detectors_.size()); }
    const DetectorConfig& config() const { return cfg_; }

private:
    DetectorConfig cfg_;
    std::vector<BinDetector> detectors_;
    std::vector<double> scratch_;  // only for the single-threaded tick()
};

}  // namespace specstream
