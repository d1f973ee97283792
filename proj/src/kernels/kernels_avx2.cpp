// AVX2/FMA variants.  Compiled with -mavx2 -mfma for this translation unit
// only; callers reach them through the runtime dispatcher.

#if defined(__x86_64__) || defined(_M_X64)

#include "stfrag/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <immintrin.h>

namespace stfrag::kernels::detail {

namespace {

// exp(v) for v in [-708, 0], 4 lanes.  Cody-Waite range reduction plus a
// degree-11 Taylor polynomial on |r| <= ln2/2; max relative error ~2 ulp.
inline __m256d exp_neg_pd(__m256d v) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    const __m256d magic = _mm256_set1_pd(6755399441055744.0); // 1.5 * 2^52

    __m256d nf = _mm256_round_pd(_mm256_mul_pd(v, log2e),
                                 _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(nf, ln2_hi, v);
    r = _mm256_fnmadd_pd(nf, ln2_lo, r);

    __m256d p = _mm256_set1_pd(2.5052108385441718775e-08); // 1/11!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.7557319223985890653e-07));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.7557319223985892510e-06));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.4801587301587301566e-05));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.9841269841269841253e-04));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.3888888888888889418e-03));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(8.3333333333333332177e-03));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(4.1666666666666664354e-02));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.6666666666666665741e-01));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(5.0e-01));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    // 2^n via exponent-field assembly; |n| < 1100 so the int fits easily.
    __m256d biased = _mm256_add_pd(nf, magic);
    __m256i iv = _mm256_sub_epi64(_mm256_castpd_si256(biased),
                                  _mm256_set1_epi64x(0x4338000000000000LL));
    __m256i expo = _mm256_slli_epi64(_mm256_add_epi64(iv, _mm256_set1_epi64x(1023)), 52);
    __m256d scale = _mm256_castsi256_pd(expo);
    return _mm256_mul_pd(p, scale);
}

inline double hsum_pd(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

} // namespace

double exp_weighted_sum_avx2(const double* a, const double* w, std::size_t n, double x) {
    const __m256d negx = _mm256_set1_pd(-x);
    const __m256d floor_arg = _mm256_set1_pd(-708.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d arg = _mm256_mul_pd(negx, _mm256_loadu_pd(a + i));
        __m256d ok = _mm256_cmp_pd(arg, floor_arg, _CMP_GE_OQ); // underflow mask
        __m256d e = exp_neg_pd(_mm256_max_pd(arg, floor_arg));
        e = _mm256_and_pd(e, ok);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), e, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double arg = -x * a[i];
        if (arg >= -708.0) tail += w[i] * std::exp(arg);
    }
    return hsum_pd(acc) + tail;
}

double osc_weighted_sum_avx2(const double* re, const double* im, std::size_t n, double theta,
                             std::size_t k0) {
    constexpr std::size_t kBlock = 512; // vector steps between resyncs
    const double c4 = std::cos(4.0 * theta);
    const double s4 = std::sin(4.0 * theta);
    const __m256d vc4 = _mm256_set1_pd(c4);
    const __m256d vs4 = _mm256_set1_pd(s4);

    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    while (k + 4 <= n) {
        alignas(32) double cs[4], sn[4];
        for (int j = 0; j < 4; ++j) {
            cs[j] = std::cos(static_cast<double>(k0 + k + j) * theta);
            sn[j] = std::sin(static_cast<double>(k0 + k + j) * theta);
        }
        __m256d c = _mm256_load_pd(cs);
        __m256d s = _mm256_load_pd(sn);
        std::size_t steps = (n - k) / 4;
        if (steps > kBlock) steps = kBlock;
        for (std::size_t q = 0; q < steps; ++q, k += 4) {
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(re + k), c, acc);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(im + k), s, acc);
            __m256d cn = _mm256_fnmadd_pd(s, vs4, _mm256_mul_pd(c, vc4));
            s = _mm256_fmadd_pd(c, vs4, _mm256_mul_pd(s, vc4));
            c = cn;
        }
    }
    double tail = 0.0;
    for (; k < n; ++k)
        tail += re[k] * std::cos(static_cast<double>(k0 + k) * theta) +
                im[k] * std::sin(static_cast<double>(k0 + k) * theta);
    return hsum_pd(acc) + tail;
}

} // namespace stfrag::kernels::detail

#endif // x86_64
