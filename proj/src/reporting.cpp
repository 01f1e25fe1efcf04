#include "specstream/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace specstream {

using nlohmann::json;

namespace {

std::int64_t period_ticks(const SpectrumReport& r) {
    return (r.periodEndMs - r.periodStartMs) / r.tickIntervalMs;
}

void derive(BandMetrics& m, std::int64_t totalCells) {
    m.avgPowerDbm = m.activeCells > 0
                        ? std::optional<double>(mw_to_dbm(
                              m.powerMwCells / static_cast<double>(m.activeCells)))
                        : std::nullopt;
    m.occupancyFraction =
        totalCells > 0 ? static_cast<double>(m.activeCells) / static_cast<double>(totalCells)
                       : 0.0;
}

}  // namespace

ReportBuilder::ReportBuilder(TimestampMs periodStartMs, TimestampMs periodEndMs,
                             TimestampMs tickIntervalMs, const BandPlan& plan,
                             std::vector<ChannelRange> channels)
    : plan_(plan) {
    if (tickIntervalMs < 1) throw std::invalid_argument("tick interval must be >= 1 ms");
    if (periodEndMs <= periodStartMs) throw std::invalid_argument("empty report period");
    if ((periodEndMs - periodStartMs) % tickIntervalMs != 0) {
        throw std::invalid_argument("report period must span whole ticks");
    }
    state_.periodStartMs = periodStartMs;
    state_.periodEndMs = periodEndMs;
    state_.tickIntervalMs = tickIntervalMs;
    state_.binCount = plan.binCount;
    state_.perBin.resize(static_cast<std::size_t>(plan.binCount));
    if (channels.empty()) {
        for (BinIndex b = 0; b < plan.binCount; ++b) {
            channels.push_back({"bin" + std::to_string(b), b, b});
        }
    }
    for (auto& ch : channels) {
        if (ch.firstBin < 0 || ch.lastBin >= plan.binCount || ch.firstBin > ch.lastBin) {
            throw std::invalid_argument("channel " + ch.name + " outside the band");
        }
        state_.perChannel.emplace_back(ch, BandMetrics{});
    }
}

void ReportBuilder::accumulate(const SpectrumEvent& ev) {
    if (ev.tStart < state_.periodStartMs || ev.tStop >= state_.periodEndMs) {
        throw OutOfPeriod("event " + std::to_string(ev.id) + " outside report period");
    }
    const double durationMs = static_cast<double>(ev.tStop - ev.tStart);
    const std::int64_t tickSpan =
        (ev.tStop - ev.tStart) / state_.tickIntervalMs + 1;
    const BinIndex first = std::max<BinIndex>(0, ev.fStartBin);
    const BinIndex last = std::min<BinIndex>(state_.binCount - 1, ev.fStopBin);
    if (first > last) throw OutOfPeriod("event " + std::to_string(ev.id) +
                                        " outside the band");
    const std::int64_t binSpan = last - first + 1;
    const double mw = dbm_to_mw(ev.meanPowerDbm);

    state_.totalTransmissions += 1;
    state_.durationSumMs += durationMs;
    state_.activeCells += tickSpan * binSpan;
    state_.powerMwCells += mw * static_cast<double>(tickSpan * binSpan);

    for (BinIndex b = first; b <= last; ++b) {
        BandMetrics& m = state_.perBin[static_cast<std::size_t>(b)];
        m.txCount += 1;
        m.activeCells += tickSpan;
        m.powerMwCells += mw * static_cast<double>(tickSpan);
    }
    for (auto& [ch, m] : state_.perChannel) {
        const BinIndex lo = std::max(ch.firstBin, first);
        const BinIndex hi = std::min(ch.lastBin, last);
        if (lo > hi) continue;
        const std::int64_t cells = static_cast<std::int64_t>(hi - lo + 1) * tickSpan;
        m.txCount += 1;
        m.activeCells += cells;
        m.powerMwCells += mw * static_cast<double>(cells);
    }
}

SpectrumReport ReportBuilder::report() const {
    SpectrumReport r = state_;
    const std::int64_t ticks = period_ticks(r);
    r.avgDurationMs = r.totalTransmissions > 0
                          ? std::optional<double>(r.durationSumMs /
                                                  static_cast<double>(r.totalTransmissions))
                          : std::nullopt;
    r.avgPowerDbm = r.activeCells > 0
                        ? std::optional<double>(mw_to_dbm(
                              r.powerMwCells / static_cast<double>(r.activeCells)))
                        : std::nullopt;
    const std::int64_t totalCells = ticks * r.binCount;
    r.occupancyFraction = totalCells > 0 ? static_cast<double>(r.activeCells) /
                                               static_cast<double>(totalCells)
                                         : 0.0;
    for (auto& m : r.perBin) derive(m, ticks);
    for (auto& [ch, m] : r.perChannel) {
        derive(m, ticks * (ch.lastBin - ch.firstBin + 1));
    }
    return r;
}

SpectrumReport merge_reports(const SpectrumReport& a, const SpectrumReport& b) {
    if (a.tickIntervalMs != b.tickIntervalMs || a.binCount != b.binCount ||
        a.perBin.size() != b.perBin.size() || a.perChannel.size() != b.perChannel.size()) {
        throw std::invalid_argument("reports cover different bands");
    }
    if (a.periodEndMs > b.periodStartMs && b.periodEndMs > a.periodStartMs) {
        throw std::invalid_argument("report periods overlap");
    }
    SpectrumReport r = a;
    r.periodStartMs = std::min(a.periodStartMs, b.periodStartMs);
    r.periodEndMs = std::max(a.periodEndMs, b.periodEndMs);
    r.totalTransmissions += b.totalTransmissions;
    r.durationSumMs += b.durationSumMs;
    r.activeCells += b.activeCells;
    r.powerMwCells += b.powerMwCells;
    for (std::size_t i = 0; i < r.perBin.size(); ++i) {
        r.perBin[i].txCount += b.perBin[i].txCount;
        r.perBin[i].activeCells += b.perBin[i].activeCells;
        r.perBin[i].powerMwCells += b.perBin[i].powerMwCells;
    }
    for (std::size_t i = 0; i < r.perChannel.size(); ++i) {
        r.perChannel[i].second.txCount += b.perChannel[i].second.txCount;
        r.perChannel[i].second.activeCells += b.perChannel[i].second.activeCells;
        r.perChannel[i].second.powerMwCells += b.perChannel[i].second.powerMwCells;
    }
    // Re-derive over the union period.
    const std::int64_t ticks = period_ticks(r);
    r.avgDurationMs = r.totalTransmissions > 0
                          ? std::optional<double>(r.durationSumMs /
                                                  static_cast<double>(r.totalTransmissions))
                          : std::nullopt;
    r.avgPowerDbm = r.activeCells > 0
                        ? std::optional<double>(mw_to_dbm(
                              r.powerMwCells / static_cast<double>(r.activeCells)))
                        : std::nullopt;
    const std::int64_t totalCells = ticks * r.binCount;
    r.occupancyFraction = totalCells > 0 ? static_cast<double>(r.activeCells) /
                                               static_cast<double>(totalCells)
                                         : 0.0;
    for (auto& m : r.perBin) derive(m, ticks);
    for (auto& [ch, m] : r.perChannel) derive(m, ticks * (ch.lastBin - ch.firstBin + 1));
    return r;
}

json report_to_json(const SpectrumReport& r, const BandPlan& plan) {
    json j;
    j["periodStartMs"] = r.periodStartMs;
    j["periodEndMs"] = r.periodEndMs;
    j["tickIntervalMs"] = r.tickIntervalMs;
    j["binCount"] = r.binCount;
    j["totalTransmissions"] = r.totalTransmissions;
    j["avgDurationMs"] = r.avgDurationMs ? json(*r.avgDurationMs) : json(nullptr);
    j["avgPowerDbm"] = r.avgPowerDbm ? json(*r.avgPowerDbm) : json(nullptr);
    j["occupancyFraction"] = r.occupancyFraction;
    j["perBin"] = json::array();
    for (std::size_t b = 0; b < r.perBin.size(); ++b) {
        const BandMetrics& m = r.perBin[b];
        json e;
        e["bin"] = b;
        e["frequencyHz"] = plan.frequencyOf(static_cast<BinIndex>(b));
        e["txCount"] = m.txCount;
        e["occupancyFraction"] = m.occupancyFraction;
        e["avgPowerDbm"] = m.avgPowerDbm ? json(*m.avgPowerDbm) : json(nullptr);
        j["perBin"].push_back(e);
    }
    j["perChannel"] = json::array();
    for (const auto& [ch, m] : r.perChannel) {
        json e;
        e["name"] = ch.name;
        e["firstBin"] = ch.firstBin;
        e["lastBin"] = ch.lastBin;
        e["txCount"] = m.txCount;
        e["occupancyFraction"] = m.occupancyFraction;
        e["avgPowerDbm"] = m.avgPowerDbm ? json(*m.avgPowerDbm) : json(nullptr);
        j["perChannel"].push_back(e);
    }
    return j;
}

std::string report_to_text(const SpectrumReport& r, const BandPlan& plan) {
    std::string out;
    char buf[256];
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out += buf;
        out += '\n';
    };
    auto num = [&](const std::optional<double>& v) -> std::string {
        if (!v) return "n/a";
        std::snprintf(buf, sizeof buf, "%.6f", *v);
        return buf;
    };
    line("period_ms: %lld..%lld", static_cast<long long>(r.periodStartMs),
         static_cast<long long>(r.periodEndMs));
    line("ticks: %lld", static_cast<long long>(period_ticks(r)));
    line("bins: %d", r.binCount);
    line("transmissions: %lld", static_cast<long long>(r.totalTransmissions));
    line("avg_duration_ms: %s", num(r.avgDurationMs).c_str());
    line("avg_power_dbm: %s", num(r.avgPowerDbm).c_str());
    line("occupancy: %.6f", r.occupancyFraction);
    out += "per_bin:\n";
    for (std::size_t b = 0; b < r.perBin.size(); ++b) {
        const BandMetrics& m = r.perBin[b];
        line("  bin %zu freq_hz %.1f: tx %lld occupancy %.6f avg_power_dbm %s", b,
             plan.frequencyOf(static_cast<BinIndex>(b)),
             static_cast<long long>(m.txCount), m.occupancyFraction,
             num(m.avgPowerDbm).c_str());
    }
    out += "per_channel:\n";
    for (const auto& [ch, m] : r.perChannel) {
        line("  channel %s bins %d..%d: tx %lld occupancy %.6f avg_power_dbm %s",
             ch.name.c_str(), ch.firstBin, ch.lastBin,
             static_cast<long long>(m.txCount), m.occupancyFraction,
             num(m.avgPowerDbm).c_str());
    }
    return out;
}

}  // namespace specstream
