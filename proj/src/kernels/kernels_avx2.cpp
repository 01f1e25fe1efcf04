// Compiled with -mavx2 (x86-64 builds only).  Nothing here may run before
// the dispatcher has confirmed AVX2 support on the executing CPU.
#if defined(__AVX2__)

#include <immintrin.h>

#include "specstream/kernels.hpp"

namespace specstream {
namespace {

void quantize_cells_avx2(const float* values, std::size_t n, float lowerBound,
                         float upperBound, std::int32_t numBins,
                         std::int32_t* cells) {
    const float cellWidth = (upperBound - lowerBound) / static_cast<float>(numBins);
    const __m256 lo = _mm256_set1_ps(lowerBound);
    const __m256 hi = _mm256_set1_ps(upperBound);
    const __m256 w = _mm256_set1_ps(cellWidth);
    const __m256i top = _mm256_set1_epi32(numBins - 1);
    const __m256i under = _mm256_set1_epi32(-1);
    const __m256i over = _mm256_set1_epi32(numBins);

    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 v = _mm256_loadu_ps(values + i);
        __m256i c = _mm256_cvttps_epi32(_mm256_div_ps(_mm256_sub_ps(v, lo), w));
        c = _mm256_min_epi32(c, top);
        const __m256i underMask = _mm256_castps_si256(_mm256_cmp_ps(v, lo, _CMP_LT_OQ));
        const __m256i overMask = _mm256_castps_si256(_mm256_cmp_ps(v, hi, _CMP_GE_OQ));
        c = _mm256_blendv_epi8(c, under, underMask);
        c = _mm256_blendv_epi8(c, over, overMask);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(cells + i), c);
    }
    for (; i < n; ++i) {
        const float v = values[i];
        if (v < lowerBound) {
            cells[i] = -1;
        } else if (v >= upperBound) {
            cells[i] = numBins;
        } else {
            auto c = static_cast<std::int32_t>((v - lowerBound) / cellWidth);
            if (c >= numBins) c = numBins - 1;
            cells[i] = c;
        }
    }
}

std::int32_t chi2_terms_avx2(const std::int32_t* observed,
                             const std::int32_t* expected, std::size_t n,
                             double scale, double epsilon, double* terms) {
    const __m256d scaleV = _mm256_set1_pd(scale);
    const __m256d epsV = _mm256_set1_pd(epsilon);
    const __m128i zero = _mm_setzero_si128();

    std::size_t i = 0;
    std::int32_t contributing = 0;
    for (; i + 4 <= n; i += 4) {
        const __m128i o32 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(observed + i));
        const __m128i e32 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(expected + i));
        const __m256d O = _mm256_cvtepi32_pd(o32);
        const __m128i expZero32 = _mm_cmpeq_epi32(e32, zero);
        const __m128i skip32 = _mm_and_si128(expZero32, _mm_cmpeq_epi32(o32, zero));
        const __m256d expZero = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(expZero32));
        const __m256d skip = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(skip32));
        // E = epsilon wherever expected == 0: keeps the divide well-defined
        // even for cells that are zeroed out below.
        const __m256d E =
            _mm256_blendv_pd(_mm256_mul_pd(_mm256_cvtepi32_pd(e32), scaleV), epsV, expZero);
        const __m256d d = _mm256_sub_pd(O, E);
        const __m256d term = _mm256_andnot_pd(skip, _mm256_div_pd(_mm256_mul_pd(d, d), E));
        _mm256_storeu_pd(terms + i, term);
        contributing += 4 - __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(skip)));
    }
    for (; i < n; ++i) {
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

namespace detail {

const Kernels* avx2_kernels_table() {
    static const Kernels k{&quantize_cells_avx2, &chi2_terms_avx2, "avx2"};
    return &k;
}

}  // namespace detail
}  // namespace specstream

#endif  // __AVX2__
