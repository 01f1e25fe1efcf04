#pragma once

#include <cstddef>
#include <cstdint>

namespace specstream {

// Hot inner loops of the per-tick pipeline, instantiated once as portable
// scalar code and once with AVX2 intrinsics.  Both variants must produce
// bit-identical output for identical input; the test suite enforces this.
//
// Callers are expected to have validated their input: values must be finite
// (quantize_cells has no defined behaviour for NaN), and count arrays must be
// non-negative.
struct Kernels {
    // Maps power readings (dBm) to histogram cells over [lowerBound,
    // upperBound) split into numBins equal-width cells.  Writes, per value:
    //   -1       when value <  lowerBound   (underflow)
    //   numBins  when value >= upperBound   (overflow)
    //   otherwise min(numBins - 1, trunc((value - lowerBound) / cellWidth))
    // cellWidth is computed in single precision as
    // (upperBound - lowerBound) / numBins so that both variants agree on the
    // exact rounding of boundary values.
    void (*quantizeCells)(const float* values, std::size_t n, float lowerBound,
                          float upperBound, std::int32_t numBins,
                          std::int32_t* cells);

    // Per-cell Pearson terms for a chi-square comparison of two count arrays.
    // Expected counts are rescaled by `scale` (observed total / expected
    // total).  For each cell:
    //   expected == 0 && observed == 0  ->  term 0.0, cell does not contribute
    //   expected == 0 && observed  > 0  ->  E = epsilon
    //   otherwise                           E = expected * scale
    //   term = (observed - E)^2 / E
    // Writes one term per cell into `terms` and returns the number of
    // contributing cells.  Summation is deliberately left to the caller so
    // that both variants feed the same ordered accumulation.
    std::int32_t (*chi2Terms)(const std::int32_t* observed,
                              const std::int32_t* expected, std::size_t n,
                              double scale, double epsilon, double* terms);

    const char* name;
};

// Portable reference implementation; always available.
const Kernels& scalar_kernels();

// AVX2 implementation, or nullptr when this build or CPU lacks AVX2.
const Kernels* avx2_kernels();

// Variant the pipeline should use: the fastest one supported by the running
// CPU, unless the environment variable SPECSTREAM_KERNELS (values "scalar"
// or "avx2") forces a choice.  Forcing "avx2" on a CPU without it falls back
// to scalar.  Resolved once per process.
const Kernels& active_kernels();

}  // namespace specstream
