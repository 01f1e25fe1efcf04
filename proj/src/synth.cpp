#include "specstream/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace specstream {

using nlohmann::json;

void SyntheticScenario::check() const {
    if (!plan.valid()) throw ConfigError("scenario band plan is not usable");
    if (tickIntervalMs <= 0) throw ConfigError("tickIntervalMs must be positive");
    if (durationMs < tickIntervalMs) {
        throw ConfigError("durationMs shorter than one tick");
    }
    if (!(noiseSigmaDb >= 0.0)) throw ConfigError("noiseSigmaDb must be >= 0");
    for (const auto& tx : transmitters) {
        if (tx.bandwidthBins < 1 || tx.bandwidthBins > plan.binCount) {
            throw ConfigError("transmitter bandwidth outside the band");
        }
        if (tx.meanDurationMs <= 0 || tx.meanIntervalMs <= 0) {
            throw ConfigError("transmitter mean duration/interval must be positive");
        }
    }
    for (const auto& b : forcedBlocks) {
        if (b.fStartBin < 0 || b.fStopBin < b.fStartBin || b.fStopBin >= plan.binCount) {
            throw ConfigError("forced block bin range outside the band");
        }
        if (b.tStopMs < b.tStartMs) throw ConfigError("forced block ends before it starts");
    }
}

namespace {

TransmitterKind kind_from_string(const std::string& s) {
    if (s == "hopper") return TransmitterKind::NarrowbandHopper;
    if (s == "wideband") return TransmitterKind::WidebandBurst;
    throw ConfigError("unknown transmitter kind: " + s);
}

std::string kind_to_string(TransmitterKind k) {
    return k == TransmitterKind::NarrowbandHopper ? "hopper" : "wideband";
}

}  // namespace

SyntheticScenario load_scenario_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario is not valid json: ") + e.what());
    }
    SyntheticScenario s;
    try {
        s.plan.startFrequencyHz = j.at("startFrequencyHz").get<double>();
        s.plan.binWidthHz = j.at("binWidthHz").get<double>();
        s.plan.binCount = j.at("binCount").get<BinIndex>();
        s.durationMs = j.at("durationMs").get<TimestampMs>();
        s.tickIntervalMs = j.value("tickIntervalMs", s.tickIntervalMs);
        s.noiseFloorDbm = j.value("noiseFloorDbm", s.noiseFloorDbm);
        s.noiseSigmaDb = j.value("noiseSigmaDb", s.noiseSigmaDb);
        s.seed = j.value("seed", s.seed);
        for (const auto& t : j.value("transmitters", json::array())) {
            TransmitterSpec tx;
            tx.kind = kind_from_string(t.at("kind").get<std::string>());
            tx.powerDbm = t.at("powerDbm").get<double>();
            tx.bandwidthBins = t.at("bandwidthBins").get<BinIndex>();
            tx.meanDurationMs = t.at("meanDurationMs").get<double>();
            tx.meanIntervalMs = t.at("meanIntervalMs").get<double>();
            s.transmitters.push_back(tx);
        }
        for (const auto& b : j.value("forcedBlocks", json::array())) {
            ForcedBlock fb;
            fb.tStartMs = b.at("tStartMs").get<TimestampMs>();
            fb.tStopMs = b.at("tStopMs").get<TimestampMs>();
            fb.fStartBin = b.at("fStartBin").get<BinIndex>();
            fb.fStopBin = b.at("fStopBin").get<BinIndex>();
            fb.powerDbm = b.at("powerDbm").get<double>();
            s.forcedBlocks.push_back(fb);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad scenario field: ") + e.what());
    }
    s.check();
    return s;
}

SyntheticScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return load_scenario_json(text);
}

std::string save_scenario_json(const SyntheticScenario& s) {
    json j;
    j["startFrequencyHz"] = s.plan.startFrequencyHz;
    j["binWidthHz"] = s.plan.binWidthHz;
    j["binCount"] = s.plan.binCount;
    j["durationMs"] = s.durationMs;
    j["tickIntervalMs"] = s.tickIntervalMs;
    j["noiseFloorDbm"] = s.noiseFloorDbm;
    j["noiseSigmaDb"] = s.noiseSigmaDb;
    j["seed"] = s.seed;
    j["transmitters"] = json::array();
    for (const auto& tx : s.transmitters) {
        j["transmitters"].push_back({{"kind", kind_to_string(tx.kind)},
                                     {"powerDbm", tx.powerDbm},
                                     {"bandwidthBins", tx.bandwidthBins},
                                     {"meanDurationMs", tx.meanDurationMs},
                                     {"meanIntervalMs", tx.meanIntervalMs}});
    }
    j["forcedBlocks"] = json::array();
    for (const auto& b : s.forcedBlocks) {
        j["forcedBlocks"].push_back({{"tStartMs", b.tStartMs},
                                     {"tStopMs", b.tStopMs},
                                     {"fStartBin", b.fStartBin},
                                     {"fStopBin", b.fStopBin},
                                     {"powerDbm", b.powerDbm}});
    }
    return j.dump(2) + "\n";
}

SyntheticStream::SyntheticStream(SyntheticScenario scenario)
    : scenario_(std::move(scenario)), noiseRng_(scenario_.seed) {
    scenario_.check();
    const TimestampMs dt = scenario_.tickIntervalMs;
    totalTicks_ = scenario_.durationMs / dt;
    const TimestampMs lastInstant = (totalTicks_ - 1) * dt;

    // Roll each transmitter's burst schedule up front.  Bursts are snapped
    // to tick instants so the labels are exact; durations stay >= 2 ticks so
    // every burst is long enough to be a transmission rather than a glitch.
    blocks_ = scenario_.forcedBlocks;
    for (std::size_t i = 0; i < scenario_.transmitters.size(); ++i) {
        const TransmitterSpec& tx = scenario_.transmitters[i];
        std::mt19937_64 rng(scenario_.seed ^
                            (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1)));
        std::exponential_distribution<double> gap(1.0 / tx.meanIntervalMs);
        const double minDur = 2.0 * static_cast<double>(dt);
        std::exponential_distribution<double> extraDur(
            1.0 / std::max(1.0, tx.meanDurationMs - minDur));
        const BinIndex maxStart = scenario_.plan.binCount - tx.bandwidthBins;
        std::uniform_int_distribution<BinIndex> startBin(0, maxStart);
        BinIndex fixedStart = startBin(rng);  // wideband keeps this one

        double cursor = gap(rng);
        while (true) {
            const auto startTick =
                static_cast<TimestampMs>(std::ceil(cursor / static_cast<double>(dt)));
            const TimestampMs tStart = startTick * dt;
            if (tStart > lastInstant) break;
            const double durMs = minDur + extraDur(rng);
            const auto durTicks = std::max<TimestampMs>(
                2, std::llround(durMs / static_cast<double>(dt)));
            const TimestampMs tStop = std::min(lastInstant, tStart + (durTicks - 1) * dt);

            ForcedBlock b;
            b.tStartMs = tStart;
            b.tStopMs = tStop;
            b.fStartBin = tx.kind == TransmitterKind::WidebandBurst ? fixedStart
                                                                    : startBin(rng);
            b.fStopBin = b.fStartBin + tx.bandwidthBins - 1;
            b.powerDbm = tx.powerDbm;
            blocks_.push_back(b);

            cursor = static_cast<double>(tStop) + gap(rng);
        }
    }
    std::sort(blocks_.begin(), blocks_.end(), [](const auto& a, const auto& b) {
        return std::tie(a.tStartMs, a.fStartBin, a.tStopMs) <
               std::tie(b.tStartMs, b.fStartBin, b.tStopMs);
    });

    truth_.reserve(blocks_.size());
    for (const auto& b : blocks_) {
        // Label the ticks the block actually covers; skip it if none.
        const TimestampMs first = ((b.tStartMs + dt - 1) / dt) * dt;
        const TimestampMs last = std::min(lastInstant, (b.tStopMs / dt) * dt);
        if (first > last) continue;
        truth_.push_back({first, last, b.fStartBin, b.fStopBin});
    }
    std::sort(truth_.begin(), truth_.end(), [](const auto& a, const auto& b) {
        return std::tie(a.tStart, a.fStartBin, a.tStop) <
               std::tie(b.tStart, b.fStartBin, b.tStop);
    });

    extraMw_.assign(static_cast<std::size_t>(scenario_.plan.binCount), 0.0);
    noise_ = std::normal_distribution<double>(0.0, scenario_.noiseSigmaDb);
}

void SyntheticStream::reset() {
    tick_ = 0;
    nextBlock_ = 0;
    activeBlocks_.clear();
    std::fill(extraMw_.begin(), extraMw_.end(), 0.0);
    noiseRng_.seed(scenario_.seed);
    noise_.reset();
}

std::optional<PsdSample> SyntheticStream::next() {
    if (tick_ >= totalTicks_) return std::nullopt;
    const TimestampMs now = tick_ * scenario_.tickIntervalMs;
    const auto binCount = static_cast<std::size_t>(scenario_.plan.binCount);

    while (nextBlock_ < blocks_.size() && blocks_[nextBlock_].tStartMs <= now) {
        activeBlocks_.push_back(nextBlock_++);
    }
    std::erase_if(activeBlocks_,
                  [&](std::size_t i) { return blocks_[i].tStopMs < now; });

    const bool anyActive = !activeBlocks_.empty();
    for (std::size_t i : activeBlocks_) {
        const ForcedBlock& b = blocks_[i];
        const double mw = dbm_to_mw(b.powerDbm);
        for (BinIndex bin = b.fStartBin; bin <= b.fStopBin; ++bin) {
            extraMw_[static_cast<std::size_t>(bin)] += mw;
        }
    }

    PsdSample sample;
    sample.timestamp = now;
    sample.values.resize(binCount);
    for (std::size_t bin = 0; bin < binCount; ++bin) {
        const double noiseDbm = scenario_.noiseFloorDbm + noise_(noiseRng_);
        if (!anyActive || extraMw_[bin] == 0.0) {
            sample.values[bin] = static_cast<float>(noiseDbm);
        } else {
            sample.values[bin] =
                static_cast<float>(mw_to_dbm(dbm_to_mw(noiseDbm) + extraMw_[bin]));
        }
    }
    if (anyActive) std::fill(extraMw_.begin(), extraMw_.end(), 0.0);

    ++tick_;
    return sample;
}

void save_truth(const std::string& path, const std::vector<GroundTruthLabel>& labels) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open truth file for writing: " + path);
    for (const auto& t : labels) {
        json j{{"tStart", t.tStart},
               {"tStop", t.tStop},
               {"fStartBin", t.fStartBin},
               {"fStopBin", t.fStopBin}};
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("failed writing truth file: " + path);
}

std::vector<GroundTruthLabel> load_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open truth file: " + path);
    std::vector<GroundTruthLabel> out;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            out.push_back({j.at("tStart").get<TimestampMs>(),
                           j.at("tStop").get<TimestampMs>(),
                           j.at("fStartBin").get<BinIndex>(),
                           j.at("fStopBin").get<BinIndex>()});
        } catch (const json::exception& e) {
            throw IoError("truth line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace specstream
