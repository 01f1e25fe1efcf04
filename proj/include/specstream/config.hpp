#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "specstream/types.hpp"

namespace specstream {

/// Detection parameters. Defaults are a plausible operating point for a
/// mostly-silent band; everything is tunable through the config file.
struct DetectorConfig {
    int recentWinSize = 20;
    int historicWinSize = 200;
    double histLowerBound = -120.0;  // dBm
    double histUpperBound = -20.0;   // dBm
    int numHistBins = 20;
    bool addOverflowBins = true;
    double alpha = 0.01;
    double marginDb = 1.0;
    int freqGapF = 1;
    int timeGapT = 2;
    // 0 means "derive as recentWinSize + historicWinSize" at load time.
    int warmupSamples = 220;

    void check() const;  // throws ConfigError on any invariant violation
};

/// Parses the flat key/value JSON config document. Unknown keys are rejected.
/// Missing keys take the defaults above; warmupSamples defaults to
/// recentWinSize + historicWinSize when absent.
DetectorConfig load_config(const std::string& jsonText);
DetectorConfig load_config_file(const std::string& path);

std::string save_config(const DetectorConfig& cfg);

/// Reads the optional band-plan keys (startFrequencyHz, binWidthHz, binCount)
/// from the same flat document. Returns nullopt when none are present.
std::optional<BandPlan> load_band_plan(const std::string& jsonText);
std::optional<BandPlan> load_band_plan_file(const std::string& path);

}  // namespace specstream
