#include "specstream/types.hpp"

namespace specstream {

const char* to_string(SampleError e) {
    switch (e) {
        case SampleError::LengthMismatch: return "LengthMismatch";
        case SampleError::NonMonotonicTime: return "NonMonotonicTime";
        case SampleError::NonFiniteValue: return "NonFiniteValue";
    }
    return "Unknown";
}

std::optional<SampleError> validate_sample(const PsdSample& sample, const BandPlan& plan,
                                           std::optional<TimestampMs> lastTimestamp) {
    if (static_cast<BinIndex>(sample.values.size()) != plan.binCount) {
        return SampleError::LengthMismatch;
    }
    if (lastTimestamp && sample.timestamp <= *lastTimestamp) {
        return SampleError::NonMonotonicTime;
    }
    for (float v : sample.values) {
        if (!std::isfinite(v)) return SampleError::NonFiniteValue;
    }
    return std::nullopt;
}

}  // namespace specstream
