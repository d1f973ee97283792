// NEON variants for aarch64, mirroring the AVX2 code with 2-wide lanes.

#if defined(__aarch64__)

#include "stfrag/kernels.hpp"

#include <arm_neon.h>
#include <cmath>
#include <cstdint>

namespace stfrag::kernels::detail {

namespace {

inline float64x2_t exp_neg_f64(float64x2_t v) {
    const float64x2_t log2e = vdupq_n_f64(1.4426950408889634074);
    const float64x2_t ln2_hi = vdupq_n_f64(6.93147180369123816490e-01);
    const float64x2_t ln2_lo = vdupq_n_f64(1.90821492927058770002e-10);

    float64x2_t nf = vrndnq_f64(vmulq_f64(v, log2e));
    float64x2_t r = vfmsq_f64(v, nf, ln2_hi);
    r = vfmsq_f64(r, nf, ln2_lo);

    float64x2_t p = vdupq_n_f64(2.5052108385441718775e-08);
    p = vfmaq_f64(vdupq_n_f64(2.7557319223985890653e-07), p, r);
    p = vfmaq_f64(vdupq_n_f64(2.7557319223985892510e-06), p, r);
    p = vfmaq_f64(vdupq_n_f64(2.4801587301587301566e-05), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.9841269841269841253e-04), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.3888888888888889418e-03), p, r);
    p = vfmaq_f64(vdupq_n_f64(8.3333333333333332177e-03), p, r);
    p = vfmaq_f64(vdupq_n_f64(4.1666666666666664354e-02), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.6666666666666665741e-01), p, r);
    p = vfmaq_f64(vdupq_n_f64(5.0e-01), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0), p, r);

    int64x2_t ni = vcvtnq_s64_f64(nf);
    int64x2_t expo = vshlq_n_s64(vaddq_s64(ni, vdupq_n_s64(1023)), 52);
    float64x2_t scale = vreinterpretq_f64_s64(expo);
    return vmulq_f64(p, scale);
}

} // namespace

double exp_weighted_sum_neon(const double* a, const double* w, std::size_t n, double x) {
    const float64x2_t negx = vdupq_n_f64(-x);
    const float64x2_t floor_arg = vdupq_n_f64(-708.0);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t arg = vmulq_f64(negx, vld1q_f64(a + i));
        uint64x2_t ok = vcgeq_f64(arg, floor_arg);
        float64x2_t e = exp_neg_f64(vmaxq_f64(arg, floor_arg));
        e = vreinterpretq_f64_u64(vandq_u64(vreinterpretq_u64_f64(e), ok));
        acc = vfmaq_f64(acc, vld1q_f64(w + i), e);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double arg = -x * a[i];
        if (arg >= -708.0) tail += w[i] * std::exp(arg);
    }
    return vaddvq_f64(acc) + tail;
}

double osc_weighted_sum_neon(const double* re, const double* im, std::size_t n, double theta,
                             std::size_t k0) {
    constexpr std::size_t kBlock = 512;
    const float64x2_t vc2 = vdupq_n_f64(std::cos(2.0 * theta));
    const float64x2_t vs2 = vdupq_n_f64(std::sin(2.0 * theta));

    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t k = 0;
    while (k + 2 <= n) {
        double cs[2], sn[2];
        for (int j = 0; j < 2; ++j) {
            cs[j] = std::cos(static_cast<double>(k0 + k + j) * theta);
            sn[j] = std::sin(static_cast<double>(k0 + k + j) * theta);
        }
        float64x2_t c = vld1q_f64(cs);
        float64x2_t s = vld1q_f64(sn);
        std::size_t steps = (n - k) / 2;
        if (steps > kBlock) steps = kBlock;
        for (std::size_t q = 0; q < steps; ++q, k += 2) {
            acc = vfmaq_f64(acc, vld1q_f64(re + k), c);
            acc = vfmaq_f64(acc, vld1q_f64(im + k), s);
            float64x2_t cn = vfmsq_f64(vmulq_f64(c, vc2), s, vs2);
            s = vfmaq_f64(vmulq_f64(s, vc2), c, vs2);
            c = cn;
        }
    }
    double tail = 0.0;
    for (; k < n; ++k)
        tail += re[k] * std::cos(static_cast<double>(k0 + k) * theta) +
                im[k] * std::sin(static_cast<double>(k0 + k) * theta);
    return vaddvq_f64(acc) + tail;
}

} // namespace stfrag::kernels::detail

#endif // __aarch64__
