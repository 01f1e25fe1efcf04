#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "specstream/config.hpp"
#include "specstream/io.hpp"
#include "specstream/types.hpp"

namespace specstream {

struct InvalidWorkerCount : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct StallTimeout : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BufferOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Contiguous, balanced split of [0, binCount) into one half-open range per
// worker; the first (binCount mod workers) ranges are one bin longer.
struct Partitioning {
    int workerCount = 1;
    std::vector<std::pair<BinIndex, BinIndex>> ranges;  // [first, last)
};
Partitioning partition(BinIndex binCount, int workers);

// Blocking bounded FIFO: producers stall when full (back-pressure instead of
// sample loss), consumers stall when empty.  close() wakes everyone; push
// after close returns false, pop drains the backlog then returns nullopt.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    bool push(T value) {
        std::unique_lock lock(mu_);
        notFull_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
        if (closed_) return false;
        items_.push_back(std::move(value));
        notEmpty_.notify_one();
        return true;
    }

    std::optional<T> pop() {
        std::unique_lock lock(mu_);
        notEmpty_.wait(lock, [&] { return !items_.empty() || closed_; });
        if (items_.empty()) return std::nullopt;
        T v = std::move(items_.front());
        items_.pop_front();
        notFull_.notify_one();
        return v;
    }

    void close() {
        std::lock_guard lock(mu_);
        closed_ = true;
        notEmpty_.notify_all();
        notFull_.notify_all();
    }

private:
    std::size_t capacity_;
    std::mutex mu_;
    std::condition_variable notFull_, notEmpty_;
    std::deque<T> items_;
    bool closed_ = false;
};

// One worker's verdicts for one tick.  During warmup entries are nullopt.
struct VerdictBatch {
    TimestampMs timestamp = 0;
    int workerId = 0;
    BinIndex firstBin = 0;
    std::vector<std::optional<BinActivity>> verdicts;
};

// Wire codec for VerdictBatch (little-endian, fixed layout), the payload of
// the length-prefixed frames a remote worker would send.
std::vector<std::uint8_t> encode_verdict_batch(const VerdictBatch& b);
VerdictBatch decode_verdict_batch(const std::uint8_t* data, std::size_t len);

// Reassembles complete per-tick verdict vectors from worker batches and
// releases them strictly in tick order: a tick is released only once all
// workers have reported it and every earlier tick has been released.
// Out-of-order arrivals buffer up to `highWatermark` pending ticks.
class VerdictBarrier {
public:
    VerdictBarrier(int workers, BinIndex binCount, std::size_t highWatermark = 64);

    void submit(VerdictBatch batch);  // throws BufferOverflow past the watermark
    void close();

    // Next complete tick, in order.  nullopt once closed and drained; throws
    // StallTimeout when nothing arrives for `timeout` while ticks are pending.
    std::optional<std::pair<TimestampMs, std::vector<std::optional<BinActivity>>>> next(
        std::chrono::milliseconds timeout);

private:
    struct Pending {
        int received = 0;
        std::vector<std::optional<BinActivity>> verdicts;
    };

    int workers_;
    BinIndex binCount_;
    std::size_t highWatermark_;
    std::mutex mu_;
    std::condition_variable ready_;
    std::map<TimestampMs, Pending> pending_;
    std::deque<std::pair<TimestampMs, std::vector<std::optional<BinActivity>>>> complete_;
    bool closed_ = false;
};

struct PipelineOptions {
    int workers = 1;
    std::size_t queueCapacity = 8;
    std::chrono::milliseconds stallTimeout{30000};
    std::optional<GeoLocation> location;  // stamped onto every event
};

struct PipelineStats {
    std::int64_t ticks = 0;
    std::int64_t eventsOpened = 0;
    std::int64_t eventsClosed = 0;
};

// An event edge leaving the pipeline, in emission order: opened (TxStart) or
// closed (TxStop) with the event snapshot at that moment.
struct EventEdge {
    SpectrumEvent event;
    bool isStop = false;
    TimestampMs emitTime = 0;
};

// The full detection topology: a source thread decodes, validates, and
// quantizes each tick once; worker threads run disjoint detector ranges; a
// barrier reassembles complete ticks in order; a single grouping thread turns
// them into events.  The sink runs on the grouping thread, so edge order (and
// therefore any output written from the sink) is identical for any worker
// count.
class Pipeline {
public:
    Pipeline(const DetectorConfig& cfg, const BandPlan& plan, PipelineOptions opts);

    using EdgeSink = std::function<void(const EventEdge&)>;

    // Blocks until the source ends (or `stop` turns true between samples),
    // then drains and closes all remaining events.  Worker and sink errors
    // rethrow here.
    PipelineStats run(SampleSource& source, const EdgeSink& sink,
                      const std::atomic<bool>* stop = nullptr);

private:
    DetectorConfig cfg_;
    BandPlan plan_;
    PipelineOptions opts_;
};

}  // namespace specstream
