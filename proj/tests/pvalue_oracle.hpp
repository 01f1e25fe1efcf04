#pragma once

// Independent upper-tail oracle for the chi-square distribution: numeric
// integration of the density in long double, with no shared code or shared
// math with the production implementation. Slow but trustworthy.

#include <algorithm>
#include <cmath>
#include <numbers>

namespace specstream::testing {

// Gamma(k/2) built multiplicatively from Gamma(1/2) = sqrt(pi) or Gamma(1).
inline long double gamma_of_half_integer(int k) {
    long double b = (k % 2 == 1) ? 0.5L : 1.0L;
    long double g = (k % 2 == 1) ? std::sqrt(std::numbers::pi_v<long double>) : 1.0L;
    const long double x = static_cast<long double>(k) / 2.0L;
    while (b < x - 0.25L) {
        g *= b;
        b += 1.0L;
    }
    return g;
}

struct ChiSquareDensity {
    long double halfK;  // k/2
    long double norm;   // 2^(k/2) * Gamma(k/2)

    long double operator()(long double t) const {
        return std::pow(t, halfK - 1.0L) * std::exp(-t / 2.0L) / norm;
    }
};

inline long double simpson_rule(const ChiSquareDensity& f, long double a, long double b) {
    return (b - a) / 6.0L * (f(a) + 4.0L * f((a + b) / 2.0L) + f(b));
}

inline long double adaptive_simpson(const ChiSquareDensity& f, long double a, long double b,
                                    long double whole, long double tol, int depth) {
    const long double m = (a + b) / 2.0L;
    const long double left = simpson_rule(f, a, m);
    const long double right = simpson_rule(f, m, b);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0L * tol) {
        return left + right + (left + right - whole) / 15.0L;
    }
    return adaptive_simpson(f, a, m, left, tol / 2.0L, depth - 1) +
           adaptive_simpson(f, m, b, right, tol / 2.0L, depth - 1);
}

inline double upper_tail_by_integration(double statistic, int dof) {
    if (statistic <= 0.0) return 1.0;
    const long double halfK = static_cast<long double>(dof) / 2.0L;
    const ChiSquareDensity f{halfK, std::pow(2.0L, halfK) * gamma_of_half_integer(dof)};

    // The density is negligible well past max(statistic, dof); chop the ray
    // into widening segments so the adaptive rule sees each scale.
    const long double upper =
        std::max<long double>(statistic, 2.0 * dof) + 500.0L;
    long double total = 0.0L;
    long double a = statistic;
    long double width = 0.5L;
    while (a < upper) {
        const long double b = std::min(a + width, upper);
        total += adaptive_simpson(f, a, b, simpson_rule(f, a, b), 1e-16L, 60);
        a = b;
        width *= 2.0L;
    }
    return static_cast<double>(total);
}

}  // namespace specstream::testing
