#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "specstream/kernels.hpp"

namespace specstream {

// Count histogram over pre-quantized cells, built for O(1) add/remove as
// values slide through a window.  With overflow slots enabled the layout is
// [underflow][numBins regular cells][overflow]; without them, out-of-range
// readings are folded into the nearest edge cell so no sample is ever lost.
class OnlineHistogram {
public:
    OnlineHistogram(std::int32_t numBins, bool overflowSlots)
        : numBins_(numBins),
          overflow_(overflowSlots),
          counts_(static_cast<std::size_t>(numBins) + (overflowSlots ? 2 : 0), 0) {
        if (numBins < 1) throw std::invalid_argument("histogram needs at least one cell");
    }

    // `cell` uses the quantizer's convention: -1 underflow, numBins overflow.
    void add(std::int32_t cell) {
        ++counts_[slot(cell)];
        ++total_;
    }

    void remove(std::int32_t cell) {
        auto& c = counts_[slot(cell)];
        if (c == 0) {
            throw std::logic_error("NegativeCount: removing from an empty histogram cell");
        }
        --c;
        --total_;
    }

    std::int64_t total() const { return total_; }
    const std::vector<std::int32_t>& counts() const { return counts_; }
    std::size_t slots() const { return counts_.size(); }

private:
    std::size_t slot(std::int32_t cell) const {
        if (overflow_) {
            if (cell < -1 || cell > numBins_) {
                throw std::out_of_range("histogram cell out of range");
            }
            return static_cast<std::size_t>(cell + 1);
        }
        if (cell < 0) return 0;
        if (cell >= numBins_) return static_cast<std::size_t>(numBins_ - 1);
        return static_cast<std::size_t>(cell);
    }

    std::int32_t numBins_;
    bool overflow_;
    std::vector<std::int32_t> counts_;
    std::int64_t total_ = 0;
};

}  // namespace specstream
