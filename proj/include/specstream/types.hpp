#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace specstream {

using TimestampMs = std::int64_t;
using BinIndex = std::int32_t;
using EventId = std::uint64_t;

/// One timestamped PSD vector: an energy reading per frequency bin.
struct PsdSample {
    TimestampMs timestamp = 0;
    std::vector<float> values;  // dBm, length == BandPlan::binCount
};

/// Maps bin indices to center frequencies for the monitored band.
struct BandPlan {
    double startFrequencyHz = 0.0;
    double binWidthHz = 0.0;
    BinIndex binCount = 0;

    double frequencyOf(BinIndex i) const {
        return startFrequencyHz + (static_cast<double>(i) + 0.5) * binWidthHz;
    }
    bool valid() const { return binCount >= 1 && binWidthHz > 0.0; }
};

struct GeoLocation {
    double latitude = 0.0;
    double longitude = 0.0;
};

/// The detected transmission tuple: time span, bin span, power, optional origin.
struct SpectrumEvent {
    EventId id = 0;
    TimestampMs tStart = 0;
    TimestampMs tStop = 0;
    BinIndex fStartBin = 0;  // inclusive
    BinIndex fStopBin = 0;   // inclusive
    double fStartHz = 0.0;
    double fStopHz = 0.0;
    double channelHz = 0.0;
    double meanPowerDbm = 0.0;
    std::optional<GeoLocation> location;
};

enum class Direction { Rising, Falling, Flat };

/// Per-bin, per-tick detection verdict.
struct BinActivity {
    BinIndex binIndex = 0;
    TimestampMs timestamp = 0;
    bool active = false;
    double pValue = 1.0;
    double chiSquareStat = 0.0;
    double recentMean = 0.0;
    double historicMean = 0.0;
    Direction direction = Direction::Flat;
    // Backdated start of the current activity run; equals timestamp when inactive.
    TimestampMs onsetTimestamp = 0;
};

enum class SampleError { LengthMismatch, NonMonotonicTime, NonFiniteValue };

const char* to_string(SampleError e);

/// Returns the rejection reason, or nullopt when the sample is acceptable.
/// lastTimestamp: timestamp of the previously accepted sample, or nullopt at stream start.
std::optional<SampleError> validate_sample(const PsdSample& sample, const BandPlan& plan,
                                           std::optional<TimestampMs> lastTimestamp);

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace specstream
