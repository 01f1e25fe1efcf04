#include "specstream/kernels.hpp"

namespace specstream {
namespace {

void quantize_cells_scalar(const float* values, std::size_t n, float lowerBound,
                           float upperBound, std::int32_t numBins,
                           std::int32_t* cells) {
    const float cellWidth = (upperBound - lowerBound) / static_cast<float>(numBins);
    for (std::size_t i = 0; i < n; ++i) {
        const float v = values[i];
        if (v < lowerBound) {
            cells[i] = -1;
        } else if (v >= upperBound) {
            cells[i] = numBins;
        } else {
            auto c = static_cast<std::int32_t>((v - lowerBound) / cellWidth);
            if (c >= numBins) c = numBins - 1;  // guards float round-up at the top edge
            cells[i] = c;
        }
    }
}

std::int32_t chi2_terms_scalar(const std::int32_t* observed,
                               const std::int32_t* expected, std::size_t n,
                               double scale, double epsilon, double* terms) {
    std::int32_t contributing = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t o = observed[i];
        const std::int32_t e = expected[i];
        if (e == 0 && o == 0) {
            terms[i] = 0.0;
            continue;
        }
        const double E = (e == 0) ? epsilon : static_cast<double>(e) * scale;
        const double d = static_cast<double>(o) - E;
        terms[i] = d * d / E;
        ++contributing;
    }
    return contributing;
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{&quantize_cells_scalar, &chi2_terms_scalar, "scalar"};
    return k;
}

}  // namespace specstream
