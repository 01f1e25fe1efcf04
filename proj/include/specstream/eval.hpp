#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "specstream/config.hpp"
#include "specstream/io.hpp"
#include "specstream/synth.hpp"
#include "specstream/types.hpp"

namespace specstream {

struct EmptyTruth : std::logic_error {
    using std::logic_error::logic_error;
};

// Half-open window [startMs, stopMs) cut out of a longer recording.
struct StreamSlice {
    TimestampMs startMs = 0;
    TimestampMs stopMs = 0;
};

// Cuts non-overlapping slices of length `sliceDurationMs` whose starts are on
// average `meanSpacingMs` apart (exponential gaps).  With `budgetMs` set,
// stops once the emitted slices add up to at least that much material.
std::vector<StreamSlice> extract_slices(TimestampMs streamLengthMs,
                                        TimestampMs sliceDurationMs,
                                        double meanSpacingMs, std::uint64_t seed,
                                        std::optional<TimestampMs> budgetMs = {});

struct MatchTolerances {
    TimestampMs tickIntervalMs = 100;
    TimestampMs tolTimeMs = 200;  // two ticks
    BinIndex tolFreqBins = 1;
};

struct Matching {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (truth, detected)
    std::vector<std::size_t> unmatchedTruth;
    std::vector<std::size_t> unmatchedDetected;
};

// One-to-one greedy matching between detections and truth labels.  A pair is
// a candidate when the detection overlaps the truth label dilated by the
// tolerances — by at least one tick in time and one bin in frequency.
// Candidates are taken by descending overlap area, ties broken by earlier
// truth start, then by index, so the result is deterministic.
Matching match_events(const std::vector<SpectrumEvent>& detected,
                      const std::vector<GroundTruthLabel>& truth,
                      const MatchTolerances& tol);

struct ConfusionMatrix {
    std::int64_t correctlyDetected = 0;
    std::int64_t undetected = 0;
    std::int64_t falselyDetected = 0;
    std::int64_t truthCount = 0;

    double correctRate() const;  // throws EmptyTruth when truthCount == 0
    double missedRate() const;
    double falseRate() const;  // also relative to the truth count
    int correctPct() const;    // rounded to whole percent
    int missedPct() const;
    int falsePct() const;
};

ConfusionMatrix confusion(const Matching& matching);

// Boundary-label scoring for matched events: each detection contributes one
// TxStart and one TxStop boundary, scored on time against the truth label's
// same-kind boundary.  Within tolerance lands on the diagonal, otherwise in
// the off-diagonal cell for its kind.  Unmatched detections still emit both
// boundary kinds; those are tallied separately as false boundaries.
struct StartStopMatrix {
    // counts[auto][truth] with 0 = TxStart, 1 = TxStop
    std::int64_t counts[2][2] = {{0, 0}, {0, 0}};
    std::int64_t falseStarts = 0;
    std::int64_t falseStops = 0;
};

StartStopMatrix start_stop_confusion(const std::vector<SpectrumEvent>& detected,
                                     const std::vector<GroundTruthLabel>& truth,
                                     const Matching& matching,
                                     TimestampMs boundaryTolMs);

struct DetectRunStats {
    std::int64_t ticks = 0;           // samples consumed
    std::int64_t verdictTicks = 0;    // ticks past warmup (verdicts emitted)
    std::int64_t activeBinTicks = 0;  // active verdicts across bins and ticks
};

struct DetectResult {
    std::vector<SpectrumEvent> events;
    DetectRunStats stats;
};

// Single-threaded detect→group run over a sample stream; the reference path
// for evaluation and benchmarks.
DetectResult detect_events(SampleSource& source, const DetectorConfig& cfg,
                           const BandPlan& plan);

struct SweepRow {
    std::string label;
    ConfusionMatrix confusion;
    std::int64_t detectedCount = 0;
    std::string error;  // non-empty when this run failed; other rows still run
};

// Runs the detect→group pipeline once per config over identical input and
// scores each run against the same truth.  Failures are recorded per row.
std::vector<SweepRow> run_sweep(
    const SyntheticScenario& scenario,
    const std::vector<std::pair<std::string, DetectorConfig>>& grid,
    const MatchTolerances& tol);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string sweep_to_json(const std::vector<SweepRow>& rows);

struct BenchmarkResult {
    double samplesPerSecond = 0.0;
    double realtimeFactor = 0.0;  // simulated time / wall time
    std::int64_t peakMemoryBytes = 0;
    std::int64_t ticks = 0;
};

BenchmarkResult benchmark(SampleSource& source, const DetectorConfig& cfg,
                          const BandPlan& plan, TimestampMs tickIntervalMs);

}  // namespace specstream
