#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "specstream/types.hpp"

namespace specstream {

// One power reading as it travels through the windows: when it was measured,
// its raw level, and the histogram cell it quantizes to (so eviction can
// decrement the right counter without re-quantizing).
struct WindowEntry {
    TimestampMs timestamp = 0;
    float value = 0.0f;
    std::int32_t cell = 0;
};

// Double-double style compensated accumulator (Neumaier variant).  The
// detector adds and removes one value per tick for the lifetime of a stream
// (10^7+ operations on a day of data), which is exactly the regime where a
// plain running sum drifts away from the true window sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    void remove(double x) { add(-x); }
    double value() const { return sum_ + comp_; }
    void reset() { sum_ = comp_ = 0.0; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Fixed-capacity FIFO over WindowEntry with an O(1) running mean.  Once the
// window is full, each push evicts the oldest entry and hands it back to the
// caller (which decides whether it flows on into another window).
class SlidingWindow {
public:
    explicit SlidingWindow(std::size_t capacity)
        : ring_(capacity) {
        assert(capacity >= 1);
    }

    std::optional<WindowEntry> push(const WindowEntry& entry) {
        std::optional<WindowEntry> evicted;
        if (size_ == ring_.size()) {
            evicted = ring_[head_];
            sum_.remove(evicted->value);
        } else {
            ++size_;
        }
        ring_[head_] = entry;
        sum_.add(entry.value);
        head_ = (head_ + 1) % ring_.size();
        return evicted;
    }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return ring_.size(); }
    bool full() const { return size_ == ring_.size(); }
    bool empty() const { return size_ == 0; }

    double mean() const {
        assert(size_ > 0);
        return sum_.value() / static_cast<double>(size_);
    }

    // Oldest-first visit, for rebuilding state or debugging.
    template <typename F>
    void for_each(F&& f) const {
        const std::size_t start = (head_ + ring_.size() - size_) % ring_.size();
        for (std::size_t i = 0; i < size_; ++i) {
            f(ring_[(start + i) % ring_.size()]);
        }
    }

private:
    std::vector<WindowEntry> ring_;
    std::size_t head_ = 0;  // next write position
    std::size_t size_ = 0;
    CompensatedSum sum_;
};

}  // namespace specstream
