#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "specstream/config.hpp"
#include "specstream/eval.hpp"
#include "specstream/event_json.hpp"
#include "specstream/event_store.hpp"
#include "specstream/io.hpp"
#include "specstream/reporting.hpp"
#include "specstream/synth.hpp"
#include "specstream/topology.hpp"
#include "specstream/types.hpp"

using nlohmann::json;
using namespace specstream;

namespace {

// A flag problem the parser could not catch: exits with the usage code.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

SampleFormat parse_format(const std::string& s) {
    if (s == "csv") return SampleFormat::Csv;
    if (s == "binary") return SampleFormat::Binary;
    throw UsageError("--format must be csv or binary, got: " + s);
}

GeoLocation parse_location(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) {
        throw UsageError("--location must be lat,lon");
    }
    try {
        GeoLocation loc;
        loc.latitude = std::stod(s.substr(0, comma));
        loc.longitude = std::stod(s.substr(comma + 1));
        return loc;
    } catch (const std::exception&) {
        throw UsageError("--location must be lat,lon");
    }
}

struct Setup {
    DetectorConfig cfg;
    std::optional<BandPlan> plan;
};

Setup load_setup(const std::string& configPath) {
    Setup s;
    if (configPath.empty()) return s;
    s.cfg = load_config_file(configPath);
    s.plan = load_band_plan_file(configPath);
    return s;
}

BandPlan require_plan(const Setup& s) {
    if (!s.plan) {
        throw UsageError(
            "the config file must define the band: "
            "startFrequencyHz, binWidthHz, binCount");
    }
    return *s.plan;
}

// Reads inline JSON, or the contents of a file when the argument is @path.
std::string text_or_file(const std::string& arg) {
    if (arg.empty() || arg[0] != '@') return arg;
    std::ifstream in(arg.substr(1));
    if (!in) throw IoError("cannot open " + arg.substr(1));
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

struct StreamArgs {
    std::string configPath;
    std::string input;
    int listenPort = -1;
    int workers = 1;
    std::string format = "csv";
    std::string out;
    std::string eventsOut;
    std::string location;
};

void add_stream_flags(CLI::App* sub, StreamArgs& a, bool allowListen) {
    sub->add_option("--config", a.configPath, "detector + band config (json)");
    sub->add_option("--input", a.input, "recorded sample file");
    if (allowListen) {
        sub->add_option("--listen", a.listenPort, "accept one TCP sample stream on this port")
            ->check(CLI::Range(0, 65535));
    }
    sub->add_option("--workers", a.workers, "detector worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", a.format, "sample encoding: csv or binary");
    sub->add_option("--out", a.out, "write event notifications here instead of stdout");
    sub->add_option("--events-out", a.eventsOut, "append finished events (ndjson) here");
    sub->add_option("--location", a.location, "receiver position as lat,lon");
}

int run_stream(const StreamArgs& a, bool allowListen) {
    const Setup setup = load_setup(a.configPath);
    const BandPlan plan = require_plan(setup);
    const SampleFormat fmt = parse_format(a.format);

    const bool haveInput = !a.input.empty();
    const bool haveListen = allowListen && a.listenPort >= 0;
    if (haveInput == haveListen) {
        throw UsageError(allowListen ? "need exactly one of --input or --listen"
                                     : "need --input");
    }

    std::unique_ptr<SampleSource> source;
    if (haveInput) {
        source = std::make_unique<FileSampleSource>(a.input, fmt, plan.binCount);
    } else {
        auto tcp = std::make_unique<TcpSampleSource>(
            "0.0.0.0", static_cast<std::uint16_t>(a.listenPort), fmt, plan.binCount);
        std::cerr << "listening on port " << tcp->port() << "\n";
        source = std::move(tcp);
    }

    std::ofstream outFile;
    if (!a.out.empty()) {
        outFile.open(a.out, std::ios::trunc);
        if (!outFile) throw IoError("cannot open output file: " + a.out);
    }
    std::ostream& out = a.out.empty() ? std::cout : outFile;

    std::ofstream eventsFile;
    if (!a.eventsOut.empty()) {
        eventsFile.open(a.eventsOut, std::ios::app);
        if (!eventsFile) throw IoError("cannot open events file: " + a.eventsOut);
    }

    PipelineOptions opts;
    opts.workers = a.workers;
    if (!a.location.empty()) opts.location = parse_location(a.location);

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    Pipeline pipeline(setup.cfg, plan, opts);
    const PipelineStats stats = pipeline.run(
        *source,
        [&](const EventEdge& edge) {
            out << notification_json(edge.event, edge.isStop, edge.emitTime, plan).dump()
                << '\n'
                << std::flush;
            if (edge.isStop && eventsFile.is_open()) {
                eventsFile << event_to_json(edge.event).dump() << '\n';
            }
        },
        &g_stop);

    out << json{{"kind", "Summary"},
                {"ticks", stats.ticks},
                {"eventsOpened", stats.eventsOpened},
                {"eventsClosed", stats.eventsClosed}}
               .dump()
        << '\n'
        << std::flush;
    return 0;
}

struct ReportArgs {
    std::string configPath;
    std::string input;
    std::string out;
    TimestampMs periodStart = 0;
    TimestampMs periodEnd = 0;
    TimestampMs tickMs = 100;
    bool asJson = false;
};

int run_report(const ReportArgs& a) {
    const Setup setup = load_setup(a.configPath);
    const BandPlan plan = require_plan(setup);

    EventStore store("events");
    store.load_ndjson(a.input);

    ReportBuilder builder(a.periodStart, a.periodEnd, a.tickMs, plan);
    std::size_t skipped = 0;
    for (const auto& stored : store.all()) {
        const SpectrumEvent& ev = stored.event;
        if (ev.tStart < a.periodStart || ev.tStop >= a.periodEnd) {
            ++skipped;  // the report covers one period; other events stay out
            continue;
        }
        builder.accumulate(ev);
    }
    if (skipped > 0) {
        std::cerr << skipped << " event(s) outside the period were skipped\n";
    }

    const SpectrumReport report = builder.report();
    const std::string rendered =
        a.asJson ? report_to_json(report, plan).dump(2) + "\n" : report_to_text(report, plan);
    if (a.out.empty()) {
        std::cout << rendered;
    } else {
        std::ofstream f(a.out, std::ios::trunc);
        if (!f) throw IoError("cannot open output file: " + a.out);
        f << rendered;
    }
    return 0;
}

struct QueryArgs {
    std::string input;
    std::string queryText;
};

int run_query(const QueryArgs& a) {
    const QueryDocument doc = parse_query(text_or_file(a.queryText));
    EventStore store(doc.from);  // the $from name picks the store; one backs the file
    store.load_ndjson(a.input);
    std::vector<StoredEvent> hits;
    if (const auto* range = std::get_if<RangeQuery>(&doc.query)) {
        hits = store.query(*range);
    } else {
        hits = store.query_location(std::get<LocationQuery>(doc.query));
    }

    json arr = json::array();
    for (const auto& h : hits) arr.push_back(event_to_json(h.event));
    std::cout << arr.dump(2) << "\n";
    return 0;
}

struct GenerateArgs {
    std::string scenarioPath;
    std::string out;
    std::string truthOut;
    std::string format = "csv";
    std::int64_t seed = -1;
};

int run_generate(const GenerateArgs& a) {
    SyntheticScenario scenario = load_scenario(a.scenarioPath);
    if (a.seed >= 0) scenario.seed = static_cast<std::uint64_t>(a.seed);

    SyntheticStream stream(scenario);
    SampleFileWriter writer(a.out, parse_format(a.format));
    while (auto sample = stream.next()) writer.write(*sample);
    if (!a.truthOut.empty()) save_truth(a.truthOut, stream.truth());

    std::cout << json{{"ticks", stream.totalTicks()},
                      {"truthLabels", stream.truth().size()},
                      {"seed", scenario.seed}}
                     .dump()
              << "\n";
    return 0;
}

struct EvalArgs {
    std::string scenarioPath;
    std::string configPath;
    std::string gridPath;
    std::string out;
    TimestampMs tolTimeMs = -1;
    BinIndex tolFreqBins = 1;
    bool asJson = false;
};

int run_eval(const EvalArgs& a) {
    const SyntheticScenario scenario = load_scenario(a.scenarioPath);

    std::vector<std::pair<std::string, DetectorConfig>> grid;
    if (a.gridPath.empty()) {
        DetectorConfig cfg;
        if (!a.configPath.empty()) cfg = load_config_file(a.configPath);
        grid.emplace_back("default", cfg);
    } else {
        json g;
        try {
            g = json::parse(text_or_file("@" + a.gridPath));
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("grid is not valid json: ") + e.what());
        }
        if (!g.is_array() || g.empty()) {
            throw ConfigError("grid must be a non-empty json array");
        }
        for (auto entry : g) {
            if (!entry.is_object() || !entry.contains("label")) {
                throw ConfigError("every grid entry needs a label");
            }
            const auto label = entry.at("label").get<std::string>();
            entry.erase("label");
            grid.emplace_back(label, load_config(entry.dump()));
        }
    }

    MatchTolerances tol;
    tol.tickIntervalMs = scenario.tickIntervalMs;
    tol.tolTimeMs = a.tolTimeMs >= 0 ? a.tolTimeMs : 2 * scenario.tickIntervalMs;
    tol.tolFreqBins = a.tolFreqBins;

    const auto rows = run_sweep(scenario, grid, tol);
    const std::string rendered = a.asJson ? sweep_to_json(rows) : sweep_to_csv(rows);
    if (a.out.empty()) {
        std::cout << rendered;
    } else {
        std::ofstream f(a.out, std::ios::trunc);
        if (!f) throw IoError("cannot open output file: " + a.out);
        f << rendered;
    }
    return 0;
}

struct BenchArgs {
    std::string scenarioPath;
    std::string configPath;
};

int run_bench(const BenchArgs& a) {
    const SyntheticScenario scenario = load_scenario(a.scenarioPath);
    DetectorConfig cfg;
    if (!a.configPath.empty()) cfg = load_config_file(a.configPath);

    SyntheticStream stream(scenario);
    const BenchmarkResult r = benchmark(stream, cfg, scenario.plan, scenario.tickIntervalMs);
    std::cout << json{{"samplesPerSecond", r.samplesPerSecond},
                      {"realtimeFactor", r.realtimeFactor},
                      {"peakMemoryBytes", r.peakMemoryBytes},
                      {"ticks", r.ticks}}
                     .dump(2)
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming spectrum activity detector"};
    app.require_subcommand(1);

    StreamArgs detectArgs;
    auto* detect = app.add_subcommand("detect", "detect transmissions, emit ndjson events");
    add_stream_flags(detect, detectArgs, /*allowListen=*/true);

    StreamArgs replayArgs;
    auto* replay = app.add_subcommand("replay", "re-run detection over a recorded file");
    add_stream_flags(replay, replayArgs, /*allowListen=*/false);

    ReportArgs reportArgs;
    auto* report = app.add_subcommand("report", "summarize stored events over a period");
    report->add_option("--config", reportArgs.configPath, "band config (json)")->required();
    report->add_option("--input", reportArgs.input, "events ndjson file")->required();
    report->add_option("--period-start", reportArgs.periodStart, "period start (ms)")
        ->required();
    report->add_option("--period-end", reportArgs.periodEnd, "period end (ms, exclusive)")
        ->required();
    report->add_option("--tick-ms", reportArgs.tickMs, "tick interval (ms)");
    report->add_flag("--json", reportArgs.asJson, "render json instead of text");
    report->add_option("--out", reportArgs.out, "write here instead of stdout");

    QueryArgs queryArgs;
    auto* query = app.add_subcommand("query", "run a query document against stored events");
    query->add_option("--input", queryArgs.input, "events ndjson file")->required();
    query->add_option("--query", queryArgs.queryText, "query json (inline or @file)")
        ->required();

    GenerateArgs generateArgs;
    auto* generate = app.add_subcommand("generate", "write a synthetic stream + truth");
    generate->add_option("--scenario", generateArgs.scenarioPath, "scenario json")
        ->required();
    generate->add_option("--out", generateArgs.out, "sample file to write")->required();
    generate->add_option("--truth", generateArgs.truthOut, "truth ndjson to write");
    generate->add_option("--format", generateArgs.format, "csv or binary");
    generate->add_option("--seed", generateArgs.seed, "override the scenario seed");

    EvalArgs evalArgs;
    auto* evalCmd = app.add_subcommand("eval", "score detection against synthetic truth");
    evalCmd->add_option("--scenario", evalArgs.scenarioPath, "scenario json")->required();
    evalCmd->add_option("--config", evalArgs.configPath, "detector config (json)");
    evalCmd->add_option("--grid", evalArgs.gridPath, "json array of labelled configs");
    evalCmd->add_option("--tol-time-ms", evalArgs.tolTimeMs, "match slack in ms");
    evalCmd->add_option("--tol-freq-bins", evalArgs.tolFreqBins, "match slack in bins");
    evalCmd->add_flag("--json", evalArgs.asJson, "render json instead of csv");
    evalCmd->add_option("--out", evalArgs.out, "write here instead of stdout");

    BenchArgs benchArgs;
    auto* bench = app.add_subcommand("bench", "measure throughput and memory");
    bench->add_option("--scenario", benchArgs.scenarioPath, "scenario json")->required();
    bench->add_option("--config", benchArgs.configPath, "detector config (json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (detect->parsed()) return run_stream(detectArgs, true);
        if (replay->parsed()) return run_stream(replayArgs, false);
        if (report->parsed()) return run_report(reportArgs);
        if (query->parsed()) return run_query(queryArgs);
        if (generate->parsed()) return run_generate(generateArgs);
        if (evalCmd->parsed()) return run_eval(evalArgs);
        if (bench->parsed()) return run_bench(benchArgs);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
