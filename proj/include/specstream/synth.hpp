#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "specstream/io.hpp"
#include "specstream/types.hpp"

namespace specstream {

// A signal generator that keys up and down on a schedule of its own.
enum class TransmitterKind : std::uint8_t {
    NarrowbandHopper,  // picks a fresh start bin for every burst
    WidebandBurst,     // keeps one fixed start bin for the whole stream
};

struct TransmitterSpec {
    TransmitterKind kind = TransmitterKind::NarrowbandHopper;
    double powerDbm = -60.0;       // plateau power per occupied bin
    BinIndex bandwidthBins = 2;    // occupied width
    double meanDurationMs = 3000;  // mean burst length
    double meanIntervalMs = 5000;  // mean quiet gap between bursts
};

// A hand-placed rectangular transmission; start/stop are inclusive instants.
struct ForcedBlock {
    TimestampMs tStartMs = 0;
    TimestampMs tStopMs = 0;
    BinIndex fStartBin = 0;
    BinIndex fStopBin = 0;
    double powerDbm = -60.0;
};

struct GroundTruthLabel {
    TimestampMs tStart = 0;  // first tick instant covered
    TimestampMs tStop = 0;   // last tick instant covered
    BinIndex fStartBin = 0;
    BinIndex fStopBin = 0;

    bool operator==(const GroundTruthLabel&) const = default;
};

struct SyntheticScenario {
    BandPlan plan;
    TimestampMs durationMs = 60'000;
    TimestampMs tickIntervalMs = 100;
    double noiseFloorDbm = -90.0;
    double noiseSigmaDb = 0.75;
    std::vector<TransmitterSpec> transmitters;
    std::vector<ForcedBlock> forcedBlocks;
    std::uint64_t seed = 1;

    void check() const;  // throws ConfigError on an unusable scenario
};

SyntheticScenario load_scenario(const std::string& path);
SyntheticScenario load_scenario_json(const std::string& text);
std::string save_scenario_json(const SyntheticScenario& scenario);

// Streams the scenario tick by tick: Gaussian noise in dB around the floor,
// transmissions added in linear power on the bins they cover.  Burst
// schedules are derived up front (they are tiny); sample rows are never
// materialised ahead of the consumer.
class SyntheticStream : public SampleSource {
public:
    explicit SyntheticStream(SyntheticScenario scenario);

    std::optional<PsdSample> next() override;
    void reset();

    std::int64_t totalTicks() const { return totalTicks_; }
    const std::vector<GroundTruthLabel>& truth() const { return truth_; }
    const SyntheticScenario& scenario() const { return scenario_; }

private:
    SyntheticScenario scenario_;
    std::vector<ForcedBlock> blocks_;  // generated bursts + forced, by start
    std::vector<GroundTruthLabel> truth_;
    std::int64_t totalTicks_ = 0;
    std::int64_t tick_ = 0;
    std::size_t nextBlock_ = 0;
    std::vector<std::size_t> activeBlocks_;
    std::vector<double> extraMw_;  // per-bin transmission power this tick
    std::mt19937_64 noiseRng_;
    std::normal_distribution<double> noise_;
};

void save_truth(const std::string& path, const std::vector<GroundTruthLabel>& labels);
std::vector<GroundTruthLabel> load_truth(const std::string& path);

}  // namespace specstream
