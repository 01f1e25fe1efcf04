#include "specstream/event_json.hpp"

namespace specstream {

using nlohmann::json;

json event_to_json(const SpectrumEvent& ev) {
    json j;
    j["id"] = ev.id;
    j["tStart"] = ev.tStart;
    j["tStop"] = ev.tStop;
    j["fStartBin"] = ev.fStartBin;
    j["fStopBin"] = ev.fStopBin;
    j["fStartHz"] = ev.fStartHz;
    j["fStopHz"] = ev.fStopHz;
    j["channelHz"] = ev.channelHz;
    j["meanPowerDbm"] = ev.meanPowerDbm;
    if (ev.location) {
        j["location"] = json::array({ev.location->latitude, ev.location->longitude});
    }
    return j;
}

SpectrumEvent event_from_json(const json& j) {
    SpectrumEvent ev;
    ev.id = j.at("id").get<EventId>();
    ev.tStart = j.at("tStart").get<TimestampMs>();
    ev.tStop = j.at("tStop").get<TimestampMs>();
    ev.fStartBin = j.at("fStartBin").get<BinIndex>();
    ev.fStopBin = j.at("fStopBin").get<BinIndex>();
    ev.fStartHz = j.value("fStartHz", 0.0);
    ev.fStopHz = j.value("fStopHz", 0.0);
    ev.channelHz = j.value("channelHz", 0.0);
    ev.meanPowerDbm = j.value("meanPowerDbm", 0.0);
    if (auto it = j.find("location"); it != j.end() && it->is_array() && it->size() == 2) {
        ev.location = GeoLocation{(*it)[0].get<double>(), (*it)[1].get<double>()};
    }
    return ev;
}

json notification_json(const SpectrumEvent& snapshot, bool isStop,
                       TimestampMs emitTime, const BandPlan& plan) {
    json j;
    j["id"] = snapshot.id;
    j["kind"] = isStop ? "TxStop" : "TxStart";
    j["time"] = emitTime;
    j["tStart"] = snapshot.tStart;
    if (isStop) j["tStop"] = snapshot.tStop;
    j["channelHz"] = snapshot.channelHz;
    j["lchannelHz"] = plan.frequencyOf(snapshot.fStartBin);
    j["rchannelHz"] = plan.frequencyOf(snapshot.fStopBin);
    j["fStartBin"] = snapshot.fStartBin;
    j["fStopBin"] = snapshot.fStopBin;
    j["meanPowerDbm"] = snapshot.meanPowerDbm;
    return j;
}

}  // namespace specstream
