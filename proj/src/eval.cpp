#include "specstream/eval.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "specstream/detector.hpp"
#include "specstream/grouping.hpp"
#include "specstream/kernels.hpp"

namespace specstream {

std::vector<StreamSlice> extract_slices(TimestampMs streamLengthMs,
                                        TimestampMs sliceDurationMs,
                                        double meanSpacingMs, std::uint64_t seed,
                                        std::optional<TimestampMs> budgetMs) {
    if (sliceDurationMs <= 0) throw std::invalid_argument("slice duration must be > 0");
    if (!(meanSpacingMs > static_cast<double>(sliceDurationMs))) {
        throw std::invalid_argument("mean spacing must exceed the slice duration");
    }
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(
        1.0 / (meanSpacingMs - static_cast<double>(sliceDurationMs)));

    std::vector<StreamSlice> out;
    TimestampMs emitted = 0;
    double cursor = gap(rng);
    while (true) {
        const auto start = static_cast<TimestampMs>(std::llround(cursor));
        if (start + sliceDurationMs > streamLengthMs) break;
        if (budgetMs && emitted >= *budgetMs) break;
        out.push_back({start, start + sliceDurationMs});
        emitted += sliceDurationMs;
        cursor = static_cast<double>(start + sliceDurationMs) + gap(rng);
    }
    return out;
}

Matching match_events(const std::vector<SpectrumEvent>& detected,
                      const std::vector<GroundTruthLabel>& truth,
                      const MatchTolerances& tol) {
    if (tol.tolTimeMs < 0 || tol.tolFreqBins < 0 || tol.tickIntervalMs <= 0) {
        throw std::invalid_argument("matching tolerances must be non-negative");
    }

    struct Candidate {
        std::int64_t area;
        TimestampMs truthStart;
        std::size_t truthIdx;
        std::size_t detIdx;
    };
    std::vector<Candidate> candidates;
    for (std::size_t ti = 0; ti < truth.size(); ++ti) {
        const GroundTruthLabel& t = truth[ti];
        for (std::size_t di = 0; di < detected.size(); ++di) {
            const SpectrumEvent& d = detected[di];
            const TimestampMs ovMs = std::min(d.tStop, t.tStop + tol.tolTimeMs) -
                                     std::max(d.tStart, t.tStart - tol.tolTimeMs);
            if (ovMs < 0) continue;
            const std::int64_t ovTicks = ovMs / tol.tickIntervalMs + 1;
            const BinIndex ovBins = std::min(d.fStopBin, t.fStopBin + tol.tolFreqBins) -
                                    std::max(d.fStartBin, t.fStartBin - tol.tolFreqBins) +
                                    1;
            if (ovBins < 1) continue;
            candidates.push_back({ovTicks * ovBins, t.tStart, ti, di});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.area != b.area) return a.area > b.area;
        return std::tie(a.truthStart, a.truthIdx, a.detIdx) <
               std::tie(b.truthStart, b.truthIdx, b.detIdx);
    });

    Matching m;
    std::vector<bool> truthTaken(truth.size(), false);
    std::vector<bool> detTaken(detected.size(), false);
    for (const Candidate& c : candidates) {
        if (truthTaken[c.truthIdx] || detTaken[c.detIdx]) continue;
        truthTaken[c.truthIdx] = true;
        detTaken[c.detIdx] = true;
        m.pairs.emplace_back(c.truthIdx, c.detIdx);
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!truthTaken[i]) m.unmatchedTruth.push_back(i);
    }
    for (std::size_t i = 0; i < detected.size(); ++i) {
        if (!detTaken[i]) m.unmatchedDetected.push_back(i);
    }
    return m;
}

namespace {

double rate_of(std::int64_t num, std::int64_t truthCount) {
    if (truthCount == 0) throw EmptyTruth("rates need a non-empty truth set");
    return static_cast<double>(num) / static_cast<double>(truthCount);
}

int pct_of(double rate) { return static_cast<int>(std::llround(100.0 * rate)); }

}  // namespace

double ConfusionMatrix::correctRate() const { return rate_of(correctlyDetected, truthCount); }
double ConfusionMatrix::missedRate() const { return rate_of(undetected, truthCount); }
double ConfusionMatrix::falseRate() const { return rate_of(falselyDetected, truthCount); }
int ConfusionMatrix::correctPct() const { return pct_of(correctRate()); }
int ConfusionMatrix::missedPct() const { return pct_of(missedRate()); }
int ConfusionMatrix::falsePct() const { return pct_of(falseRate()); }

ConfusionMatrix confusion(const Matching& matching) {
    ConfusionMatrix c;
    c.correctlyDetected = static_cast<std::int64_t>(matching.pairs.size());
    c.undetected = static_cast<std::int64_t>(matching.unmatchedTruth.size());
    c.falselyDetected = static_cast<std::int64_t>(matching.unmatchedDetected.size());
    c.truthCount = c.correctlyDetected + c.undetected;
    return c;
}

StartStopMatrix start_stop_confusion(const std::vector<SpectrumEvent>& detected,
                                     const std::vector<GroundTruthLabel>& truth,
                                     const Matching& matching,
                                     TimestampMs boundaryTolMs) {
    StartStopMatrix m;
    for (const auto& [ti, di] : matching.pairs) {
        const GroundTruthLabel& t = truth[ti];
        const SpectrumEvent& d = detected[di];
        const bool startOnTime = std::llabs(d.tStart - t.tStart) <= boundaryTolMs;
        const bool stopOnTime = std::llabs(d.tStop - t.tStop) <= boundaryTolMs;
        m.counts[0][startOnTime ? 0 : 1] += 1;
        m.counts[1][stopOnTime ? 1 : 0] += 1;
    }
    m.falseStarts = static_cast<std::int64_t>(matching.unmatchedDetected.size());
    m.falseStops = m.falseStarts;
    return m;
}

DetectResult detect_events(SampleSource& source, const DetectorConfig& cfg,
                           const BandPlan& plan) {
    cfg.check();
    if (!plan.valid()) throw ConfigError("band plan is not usable");
    const Kernels& kernels = active_kernels();
    DetectorBank bank(plan.binCount, cfg);
    TimeGrouper grouper(cfg, plan);

    DetectResult result;
    std::vector<std::int32_t> cells(static_cast<std::size_t>(plan.binCount));
    std::optional<TimestampMs> lastTs;
    while (auto sample = source.next()) {
        if (auto err = validate_sample(*sample, plan, lastTs)) {
            throw MalformedRecord("sample " + std::to_string(result.stats.ticks + 1) +
                                  " rejected: " + to_string(*err));
        }
        lastTs = sample->timestamp;
        kernels.quantizeCells(sample->values.data(), sample->values.size(),
                              static_cast<float>(cfg.histLowerBound),
                              static_cast<float>(cfg.histUpperBound), cfg.numHistBins,
                              cells.data());
        auto verdicts = bank.tick(*sample, cells.data());
        bool anyVerdict = false;
        for (const auto& v : verdicts) {
            if (!v) continue;
            anyVerdict = true;
            if (v->active) ++result.stats.activeBinTicks;
        }
        if (anyVerdict) ++result.stats.verdictTicks;
        GroupTick out = grouper.tick(sample->timestamp, verdicts);
        for (auto& ev : out.closed) result.events.push_back(std::move(ev));
        ++result.stats.ticks;
    }
    for (auto& ev : grouper.flush()) result.events.push_back(std::move(ev));
    return result;
}

std::vector<SweepRow> run_sweep(
    const SyntheticScenario& scenario,
    const std::vector<std::pair<std::string, DetectorConfig>>& grid,
    const MatchTolerances& tol) {
    if (grid.empty()) throw std::invalid_argument("parameter grid is empty");
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const auto& [label, cfg] : grid) {
        SweepRow row;
        row.label = label;
        try {
            SyntheticStream stream(scenario);
            DetectResult run = detect_events(stream, cfg, scenario.plan);
            row.detectedCount = static_cast<std::int64_t>(run.events.size());
            row.confusion = confusion(match_events(run.events, stream.truth(), tol));
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "label,truth,detected,correct,missed,false,error\n";
    for (const auto& r : rows) {
        out << r.label << ',' << r.confusion.truthCount << ',' << r.detectedCount << ','
            << r.confusion.correctlyDetected << ',' << r.confusion.undetected << ','
            << r.confusion.falselyDetected << ',' << r.error << '\n';
    }
    return out.str();
}

std::string sweep_to_json(const std::vector<SweepRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j{{"label", r.label},
                         {"truth", r.confusion.truthCount},
                         {"detected", r.detectedCount},
                         {"correct", r.confusion.correctlyDetected},
                         {"missed", r.confusion.undetected},
                         {"false", r.confusion.falselyDetected}};
        if (!r.error.empty()) j["error"] = r.error;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

BenchmarkResult benchmark(SampleSource& source, const DetectorConfig& cfg,
                          const BandPlan& plan, TimestampMs tickIntervalMs) {
    if (tickIntervalMs <= 0) throw std::invalid_argument("tick interval must be > 0");
    const auto t0 = std::chrono::steady_clock::now();
    DetectResult run = detect_events(source, cfg, plan);
    const auto t1 = std::chrono::steady_clock::now();
    const double wallSeconds =
        std::max(1e-9, std::chrono::duration<double>(t1 - t0).count());

    BenchmarkResult r;
    r.ticks = run.stats.ticks;
    r.samplesPerSecond = static_cast<double>(r.ticks) / wallSeconds;
    const double simulatedSeconds =
        static_cast<double>(r.ticks) * static_cast<double>(tickIntervalMs) / 1000.0;
    r.realtimeFactor = simulatedSeconds / wallSeconds;
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    r.peakMemoryBytes = static_cast<std::int64_t>(usage.ru_maxrss) * 1024;
    return r;
}

}  // namespace specstream
