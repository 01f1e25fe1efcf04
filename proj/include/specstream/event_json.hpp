#pragma once

#include <nlohmann/json.hpp>

#include "specstream/types.hpp"

namespace specstream {

// Full event record, used for the persistent store format, the eval truth
// matcher, and the query subcommand's results.
nlohmann::json event_to_json(const SpectrumEvent& ev);
SpectrumEvent event_from_json(const nlohmann::json& j);

// Streaming notification line, emitted when an event opens (kind "TxStart",
// no tStop yet) or closes (kind "TxStop").  `emitTime` is the tick at which
// the pipeline recognized the edge; tStart/tStop are the event's own
// (backdated) boundaries.
nlohmann::json notification_json(const SpectrumEvent& snapshot, bool isStop,
                                 TimestampMs emitTime, const BandPlan& plan);

}  // namespace specstream
