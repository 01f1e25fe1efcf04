#pragma once

#include <stdexcept>
#include <vector>

#include "specstream/histogram.hpp"
#include "specstream/kernels.hpp"

namespace specstream {

struct EmptyHistogram : std::logic_error {
    EmptyHistogram() : std::logic_error("EmptyHistogram: cannot compare against zero samples") {}
};

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 1;
};

inline constexpr double kChiSquareEpsilon = 0.5;

// Pearson goodness-of-fit of `observed` against `expected`, with expected
// counts rescaled to the observed total so windows of different sizes can be
// compared.  Cells empty on both sides are skipped; cells expected-empty but
// observed-occupied contribute against a small pseudocount instead of
// dividing by zero.  Degrees of freedom are the contributing cell count minus
// one, never below one.  Throws EmptyHistogram when either side has no
// samples.  `scratch` is reused across calls to keep the hot path
// allocation-free; `kernels` selects the SIMD variant.
ChiSquareResult chi_square_compare(const OnlineHistogram& observed,
                                   const OnlineHistogram& expected,
                                   std::vector<double>& scratch,
                                   const Kernels& kernels = active_kernels());

ChiSquareResult chi_square_compare(const OnlineHistogram& observed,
                                   const OnlineHistogram& expected);

// Upper tail of the chi-square distribution: P(X >= statistic) for `dof`
// degrees of freedom, i.e. the regularized upper incomplete gamma
// Q(dof/2, statistic/2).  Accurate to ~1e-13 relative over the ranges the
// detector exercises.
double chi_square_pvalue(double statistic, int dof);

}  // namespace specstream
