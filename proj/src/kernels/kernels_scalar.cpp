#include "stfrag/kernels.hpp"

#include <cmath>

namespace stfrag::kernels::detail {

double exp_weighted_sum_scalar(const double* a, const double* w, std::size_t n, double x) {
    double acc0 = 0.0, acc1 = 0.0;
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        acc0 += w[i] * std::exp(-x * a[i]);
        acc1 += w[i + 1] * std::exp(-x * a[i + 1]);
    }
    if (i < n) acc0 += w[i] * std::exp(-x * a[i]);
    return acc0 + acc1;
}

// Rotation recurrence for (cos(k*theta), sin(k*theta)) with a libm resync
// every block to stop floating-point drift.  Drift per block is
// O(block * eps), well below the 1e-12 equivalence budget.
double osc_weighted_sum_scalar(const double* re, const double* im, std::size_t n, double theta,
                               std::size_t k0) {
    constexpr std::size_t kBlock = 512;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);

    double acc = 0.0;
    std::size_t k = 0;
    while (k < n) {
        double c = std::cos(static_cast<double>(k0 + k) * theta);
        double s = std::sin(static_cast<double>(k0 + k) * theta);
        const std::size_t stop = (n - k < kBlock) ? n : k + kBlock;
        for (; k < stop; ++k) {
            acc += re[k] * c + im[k] * s;
            const double cn = c * ct - s * st;
            s = s * ct + c * st;
            c = cn;
        }
    }
    return acc;
}

} // namespace stfrag::kernels::detail
