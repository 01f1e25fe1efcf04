#include "specstream/chi_square.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace specstream {

ChiSquareResult chi_square_compare(const OnlineHistogram& observed,
                                   const OnlineHistogram& expected,
                                   std::vector<double>& scratch,
                                   const Kernels& kernels) {
    if (observed.total() == 0 || expected.total() == 0) throw EmptyHistogram();
    if (observed.slots() != expected.slots()) {
        throw std::invalid_argument("histogram layouts differ");
    }

    const std::size_t n = observed.slots();
    scratch.resize(n);
    const double scale = static_cast<double>(observed.total()) /
                         static_cast<double>(expected.total());
    const std::int32_t contributing =
        kernels.chi2Terms(observed.counts().data(), expected.counts().data(), n,
                          scale, kChiSquareEpsilon, scratch.data());

    // Single ordered accumulation shared by every kernel variant, so the
    // statistic is bit-identical regardless of which one filled the buffer.
    double statistic = 0.0;
    for (std::size_t i = 0; i < n; ++i) statistic += scratch[i];

    ChiSquareResult r;
    r.statistic = statistic;
    r.dof = std::max(1, contributing - 1);
    return r;
}

ChiSquareResult chi_square_compare(const OnlineHistogram& observed,
                                   const OnlineHistogram& expected) {
    std::vector<double> scratch;
    return chi_square_compare(observed, expected, scratch);
}

namespace {

constexpr double kMachEps = 1.11022302462515654042e-16;  // 2^-53
constexpr double kBig = 4.503599627370496e15;
constexpr double kBigInv = 2.22044604925031308085e-16;

double regularized_gamma_lower(double a, double x);

// Upper regularized incomplete gamma Q(a, x) via the classic continued
// fraction, switching to 1 - P(a, x) where the power series converges faster.
double regularized_gamma_upper(double a, double x) {
    if (x <= 0.0 || a <= 0.0) return 1.0;
    if (x < 1.0 || x < a) return 1.0 - regularized_gamma_lower(a, x);

    double ax = a * std::log(x) - x - std::lgamma(a);
    if (ax < -709.0) return 0.0;  // exp would underflow past double range
    ax = std::exp(ax);

    double y = 1.0 - a;
    double z = x + y + 1.0;
    double c = 0.0;
    double pkm2 = 1.0, qkm2 = x;
    double pkm1 = x + 1.0, qkm1 = z * x;
    double ans = pkm1 / qkm1;
    double t;
    do {
        c += 1.0;
        y += 1.0;
        z += 2.0;
        const double yc = y * c;
        const double pk = pkm1 * z - pkm2 * yc;
        const double qk = qkm1 * z - qkm2 * yc;
        if (qk != 0.0) {
            const double r = pk / qk;
            t = std::abs((ans - r) / r);
            ans = r;
        } else {
            t = 1.0;
        }
        pkm2 = pkm1;
        pkm1 = pk;
        qkm2 = qkm1;
        qkm1 = qk;
        if (std::abs(pk) > kBig) {
            pkm2 *= kBigInv;
            pkm1 *= kBigInv;
            qkm2 *= kBigInv;
            qkm1 *= kBigInv;
        }
    } while (t > kMachEps);

    return ans * ax;
}

double regularized_gamma_lower(double a, double x) {
    if (x <= 0.0 || a <= 0.0) return 0.0;
    if (x > 1.0 && x > a) return 1.0 - regularized_gamma_upper(a, x);

    double ax = a * std::log(x) - x - std::lgamma(a);
    if (ax < -709.0) return 0.0;
    ax = std::exp(ax);

    double r = a;
    double c = 1.0;
    double ans = 1.0;
    do {
        r += 1.0;
        c *= x / r;
        ans += c;
    } while (c / ans > kMachEps);

    return ans * ax / a;
}

}  // namespace

double chi_square_pvalue(double statistic, int dof) {
    if (dof < 1) throw std::invalid_argument("degrees of freedom must be >= 1");
    if (!(statistic > 0.0)) return 1.0;  // also covers statistic == 0
    if (std::isinf(statistic)) return 0.0;
    return regularized_gamma_upper(0.5 * dof, 0.5 * statistic);
}

}  // namespace specstream
