#ifndef STFRAG_KERNELS_HPP
#define STFRAG_KERNELS_HPP

#include <cstddef>
#include <string>

namespace stfrag::kernels {

// Data-parallel inner loops behind the density evaluators.  Each kernel has
// a scalar reference implementation and SIMD variants selected at runtime;
// the variants are equivalence-tested against the reference in the unit
// suite.  Results are deterministic for a fixed backend on a fixed machine.

enum class Backend { Auto, Scalar, Avx2, Neon };

// Returns the backend actually in use after resolution of Auto (CPU probe
// plus the STFRAG_KERNEL environment override).
Backend active_backend();
std::string backend_name(Backend b);

// Force a backend (mainly for tests).  Throws domain_error if the requested
// backend is not available on this CPU.
void set_backend(Backend b);

// sum_i w[i] * exp(-x * a[i]);  requires x >= 0 and a[i] >= 0 so every
// exponent is in (-inf, 0].
double exp_weighted_sum(const double* a, const double* w, std::size_t n, double x);

// sum_{q=0}^{n-1} ( re[q]*cos((k0+q)*theta) + im[q]*sin((k0+q)*theta) )
double osc_weighted_sum(const double* re, const double* im, std::size_t n, double theta,
                        std::size_t k0 = 0);

namespace detail {
double exp_weighted_sum_scalar(const double* a, const double* w, std::size_t n, double x);
double osc_weighted_sum_scalar(const double* re, const double* im, std::size_t n, double theta,
                               std::size_t k0);
#if defined(__x86_64__) || defined(_M_X64)
double exp_weighted_sum_avx2(const double* a, const double* w, std::size_t n, double x);
double osc_weighted_sum_avx2(const double* re, const double* im, std::size_t n, double theta,
                             std::size_t k0);
#endif
#if defined(__aarch64__)
double exp_weighted_sum_neon(const double* a, const double* w, std::size_t n, double x);
double osc_weighted_sum_neon(const double* re, const double* im, std::size_t n, double theta,
                             std::size_t k0);
#endif
} // namespace detail

} // namespace stfrag::kernels

#endif
