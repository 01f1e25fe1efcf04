#include "specstream/topology.hpp"

#include <cstring>
#include <thread>

#include "specstream/detector.hpp"
#include "specstream/grouping.hpp"
#include "specstream/kernels.hpp"

namespace specstream {

Partitioning partition(BinIndex binCount, int workers) {
    if (workers < 1 || workers > binCount) {
        throw InvalidWorkerCount("worker count " + std::to_string(workers) +
                                 " not in [1, " + std::to_string(binCount) + "]");
    }
    Partitioning p;
    p.workerCount = workers;
    const BinIndex base = binCount / workers;
    const BinIndex extra = binCount % workers;
    BinIndex at = 0;
    for (int w = 0; w < workers; ++w) {
        const BinIndex len = base + (w < extra ? 1 : 0);
        p.ranges.emplace_back(at, at + len);
        at += len;
    }
    return p;
}

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& out, const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof v);
}

template <typename T>
T take(const std::uint8_t*& p, const std::uint8_t* end) {
    if (static_cast<std::size_t>(end - p) < sizeof(T)) {
        throw TruncatedRecord("verdict batch ends mid-field");
    }
    T v;
    std::memcpy(&v, p, sizeof v);
    p += sizeof v;
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_verdict_batch(const VerdictBatch& b) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + b.verdicts.size() * 46);
    put(out, static_cast<std::int64_t>(b.timestamp));
    put(out, static_cast<std::int32_t>(b.workerId));
    put(out, static_cast<std::int32_t>(b.firstBin));
    put(out, static_cast<std::uint32_t>(b.verdicts.size()));
    for (const auto& v : b.verdicts) {
        put(out, static_cast<std::uint8_t>(v.has_value() ? 1 : 0));
        if (!v) continue;
        put(out, static_cast<std::int32_t>(v->binIndex));
        put(out, static_cast<std::int64_t>(v->timestamp));
        put(out, static_cast<std::uint8_t>(v->active ? 1 : 0));
        put(out, v->pValue);
        put(out, v->chiSquareStat);
        put(out, v->recentMean);
        put(out, v->historicMean);
        put(out, static_cast<std::uint8_t>(v->direction));
        put(out, static_cast<std::int64_t>(v->onsetTimestamp));
    }
    return out;
}

VerdictBatch decode_verdict_batch(const std::uint8_t* data, std::size_t len) {
    const std::uint8_t* p = data;
    const std::uint8_t* end = data + len;
    VerdictBatch b;
    b.timestamp = take<std::int64_t>(p, end);
    b.workerId = take<std::int32_t>(p, end);
    b.firstBin = take<std::int32_t>(p, end);
    const auto count = take<std::uint32_t>(p, end);
    b.verdicts.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto present = take<std::uint8_t>(p, end);
        if (present == 0) continue;
        if (present != 1) throw MalformedRecord("bad presence flag in verdict batch");
        BinActivity a;
        a.binIndex = take<std::int32_t>(p, end);
        a.timestamp = take<std::int64_t>(p, end);
        a.active = take<std::uint8_t>(p, end) != 0;
        a.pValue = take<double>(p, end);
        a.chiSquareStat = take<double>(p, end);
        a.recentMean = take<double>(p, end);
        a.historicMean = take<double>(p, end);
        const auto dir = take<std::uint8_t>(p, end);
        if (dir > 2) throw MalformedRecord("bad direction in verdict batch");
        a.direction = static_cast<Direction>(dir);
        a.onsetTimestamp = take<std::int64_t>(p, end);
        b.verdicts[i] = a;
    }
    if (p != end) throw MalformedRecord("trailing bytes in verdict batch");
    return b;
}

VerdictBarrier::VerdictBarrier(int workers, BinIndex binCount, std::size_t highWatermark)
    : workers_(workers), binCount_(binCount), highWatermark_(highWatermark) {}

void VerdictBarrier::submit(VerdictBatch batch) {
    std::lock_guard lock(mu_);
    if (closed_) throw std::logic_error("submit after close");
    auto it = pending_.find(batch.timestamp);
    if (it == pending_.end()) {
        if (pending_.size() >= highWatermark_) {
            throw BufferOverflow("more than " + std::to_string(highWatermark_) +
                                 " ticks buffered out of order");
        }
        it = pending_.emplace(batch.timestamp, Pending{}).first;
        it->second.verdicts.resize(static_cast<std::size_t>(binCount_));
    }
    Pending& slot = it->second;
    for (std::size_t i = 0; i < batch.verdicts.size(); ++i) {
        slot.verdicts[static_cast<std::size_t>(batch.firstBin) + i] =
            std::move(batch.verdicts[i]);
    }
    slot.received += 1;

    // Release every leading tick that is now complete, strictly in order.
    bool releasedAny = false;
    while (!pending_.empty() && pending_.begin()->second.received == workers_) {
        auto front = pending_.begin();
        complete_.emplace_back(front->first, std::move(front->second.verdicts));
        pending_.erase(front);
        releasedAny = true;
    }
    if (releasedAny) ready_.notify_all();
}

void VerdictBarrier::close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    ready_.notify_all();
}

std::optional<std::pair<TimestampMs, std::vector<std::optional<BinActivity>>>>
VerdictBarrier::next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    while (complete_.empty()) {
        if (closed_) {
            if (!pending_.empty()) {
                throw std::runtime_error("stream closed with incomplete ticks");
            }
            return std::nullopt;
        }
        if (ready_.wait_for(lock, timeout) == std::cv_status::timeout &&
            complete_.empty() && !closed_) {
            throw StallTimeout("no verdicts for " + std::to_string(timeout.count()) +
                               " ms");
        }
    }
    auto out = std::move(complete_.front());
    complete_.pop_front();
    return out;
}

Pipeline::Pipeline(const DetectorConfig& cfg, const BandPlan& plan, PipelineOptions opts)
    : cfg_(cfg), plan_(plan), opts_(opts) {
    cfg_.check();
    if (!plan_.valid()) throw ConfigError("band plan is not usable");
}

PipelineStats Pipeline::run(SampleSource& source, const EdgeSink& sink,
                            const std::atomic<bool>* stop) {
    struct TickData {
        TimestampMs timestamp;
        std::shared_ptr<const std::vector<float>> values;
        std::shared_ptr<const std::vector<std::int32_t>> cells;
    };

    const Partitioning parts = partition(plan_.binCount, opts_.workers);
    DetectorBank bank(plan_.binCount, cfg_);
    VerdictBarrier barrier(opts_.workers, plan_.binCount,
                           std::max<std::size_t>(16, opts_.queueCapacity + 2));
    std::vector<std::unique_ptr<BoundedQueue<TickData>>> queues;
    for (int w = 0; w < opts_.workers; ++w) {
        queues.push_back(std::make_unique<BoundedQueue<TickData>>(opts_.queueCapacity));
    }

    std::atomic<bool> abort{false};
    std::mutex errMu;
    std::exception_ptr firstError;
    auto recordError = [&] {
        std::lock_guard lock(errMu);
        if (!firstError) firstError = std::current_exception();
        abort.store(true);
    };

    const Kernels& kernels = active_kernels();
    PipelineStats stats;

    std::vector<std::thread> workers;
    for (int w = 0; w < opts_.workers; ++w) {
        workers.emplace_back([&, w] {
            const auto [first, last] = parts.ranges[static_cast<std::size_t>(w)];
            std::vector<double> scratch;
            std::vector<std::optional<BinActivity>> out(
                static_cast<std::size_t>(plan_.binCount));
            try {
                while (auto tick = queues[static_cast<std::size_t>(w)]->pop()) {
                    bank.tick_range(first, last, tick->timestamp, tick->values->data(),
                                    tick->cells->data(), out.data(), scratch, kernels);
                    VerdictBatch batch;
                    batch.timestamp = tick->timestamp;
                    batch.workerId = w;
                    batch.firstBin = first;
                    batch.verdicts.assign(out.begin() + first, out.begin() + last);
                    barrier.submit(std::move(batch));
                }
            } catch (...) {
                recordError();
            }
        });
    }

    std::thread groupingThread([&] {
        TimeGrouper grouper(cfg_, plan_);
        TimestampMs lastTs = 0;
        auto emit = [&](SpectrumEvent ev, bool isStop, TimestampMs at) {
            if (opts_.location) ev.location = opts_.location;
            sink(EventEdge{std::move(ev), isStop, at});
        };
        try {
            while (auto tick = barrier.next(opts_.stallTimeout)) {
                lastTs = tick->first;
                GroupTick out = grouper.tick(tick->first, tick->second);
                for (auto& ev : out.opened) {
                    ++stats.eventsOpened;
                    emit(std::move(ev), false, tick->first);
                }
                for (auto& ev : out.closed) {
                    ++stats.eventsClosed;
                    emit(std::move(ev), true, tick->first);
                }
            }
            for (auto& ev : grouper.flush()) {
                ++stats.eventsClosed;
                emit(std::move(ev), true, lastTs);
            }
        } catch (...) {
            recordError();
        }
    });

    // Source loop: decode/validate/quantize once, fan out to every worker.
    std::optional<TimestampMs> lastTimestamp;
    try {
        while (!abort.load() && !(stop && stop->load())) {
            auto sample = source.next();
            if (!sample) break;
            if (auto err = validate_sample(*sample, plan_, lastTimestamp)) {
                throw MalformedRecord("sample " + std::to_string(stats.ticks + 1) +
                                      " rejected: " + to_string(*err));
            }
            lastTimestamp = sample->timestamp;
            auto values = std::make_shared<std::vector<float>>(std::move(sample->values));
            auto cells = std::make_shared<std::vector<std::int32_t>>(values->size());
            kernels.quantizeCells(values->data(), values->size(),
                                  static_cast<float>(cfg_.histLowerBound),
                                  static_cast<float>(cfg_.histUpperBound),
                                  cfg_.numHistBins, cells->data());
            const TickData tick{sample->timestamp, values, cells};
            for (auto& q : queues) q->push(tick);
            ++stats.ticks;
        }
    } catch (...) {
        recordError();
    }

    for (auto& q : queues) q->close();
    for (auto& t : workers) t.join();
    barrier.close();
    groupingThread.join();

    if (firstError) std::rethrow_exception(firstError);
    return stats;
}

}  // namespace specstream
