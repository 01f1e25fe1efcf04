#include "specstream/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace specstream {

using nlohmann::json;

namespace {

[[noreturn]] void violation(const std::string& field, const std::string& why) {
    throw ConfigError("InvariantViolation: " + field + ": " + why);
}

template <typename T>
void take(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            violation(key, "wrong type");
        }
    }
}

}  // namespace

void DetectorConfig::check() const {
    if (recentWinSize < 2) violation("recentWinSize", "must be >= 2");
    if (historicWinSize <= recentWinSize)
        violation("historicWinSize", "must be > recentWinSize");
    if (!(histUpperBound > histLowerBound))
        violation("histUpperBound", "must be > histLowerBound");
    if (numHistBins < 2) violation("numHistBins", "must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) violation("alpha", "must be in (0, 1)");
    if (marginDb < 0.0) violation("marginDb", "must be >= 0");
    if (freqGapF < 0) violation("freqGapF", "must be >= 0");
    if (timeGapT < 0) violation("timeGapT", "must be >= 0");
    if (warmupSamples < recentWinSize + historicWinSize)
        violation("warmupSamples", "must be >= recentWinSize + historicWinSize");
}

DetectorConfig load_config(const std::string& jsonText) {
    json doc;
    std::string text = jsonText;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) text = "{}";
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("ParseError: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("ParseError: config must be a JSON object");

    static const char* kKnown[] = {
        "recentWinSize", "historicWinSize", "histLowerBound", "histUpperBound",
        "numHistBins",   "addOverflowBins", "alpha",          "marginDb",
        "freqGapF",      "timeGapT",        "warmupSamples",  "startFrequencyHz",
        "binWidthHz",    "binCount"};
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        bool known = false;
        for (const char* k : kKnown) known = known || it.key() == k;
        if (!known) violation(it.key(), "unknown field");
    }

    DetectorConfig cfg;
    take(doc, "recentWinSize", cfg.recentWinSize);
    take(doc, "historicWinSize", cfg.historicWinSize);
    take(doc, "histLowerBound", cfg.histLowerBound);
    take(doc, "histUpperBound", cfg.histUpperBound);
    take(doc, "numHistBins", cfg.numHistBins);
    take(doc, "addOverflowBins", cfg.addOverflowBins);
    take(doc, "alpha", cfg.alpha);
    take(doc, "marginDb", cfg.marginDb);
    take(doc, "freqGapF", cfg.freqGapF);
    take(doc, "timeGapT", cfg.timeGapT);
    if (doc.contains("warmupSamples")) {
        take(doc, "warmupSamples", cfg.warmupSamples);
    } else {
        cfg.warmupSamples = cfg.recentWinSize + cfg.historicWinSize;
    }
    cfg.check();
    return cfg;
}

DetectorConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str());
}

std::string save_config(const DetectorConfig& cfg) {
    json doc;
    doc["recentWinSize"] = cfg.recentWinSize;
    doc["historicWinSize"] = cfg.historicWinSize;
    doc["histLowerBound"] = cfg.histLowerBound;
    doc["histUpperBound"] = cfg.histUpperBound;
    doc["numHistBins"] = cfg.numHistBins;
    doc["addOverflowBins"] = cfg.addOverflowBins;
    doc["alpha"] = cfg.alpha;
    doc["marginDb"] = cfg.marginDb;
    doc["freqGapF"] = cfg.freqGapF;
    doc["timeGapT"] = cfg.timeGapT;
    doc["warmupSamples"] = cfg.warmupSamples;
    return doc.dump(2);
}

std::optional<BandPlan> load_band_plan(const std::string& jsonText) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("ParseError: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("ParseError: config must be a JSON object");
    if (!doc.contains("binCount") && !doc.contains("startFrequencyHz") &&
        !doc.contains("binWidthHz")) {
        return std::nullopt;
    }
    BandPlan plan;
    take(doc, "startFrequencyHz", plan.startFrequencyHz);
    take(doc, "binWidthHz", plan.binWidthHz);
    take(doc, "binCount", plan.binCount);
    if (plan.binCount < 1) violation("binCount", "must be >= 1");
    if (!(plan.binWidthHz > 0.0)) violation("binWidthHz", "must be > 0");
    return plan;
}

std::optional<BandPlan> load_band_plan_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_band_plan(ss.str());
}

}  // namespace specstream
