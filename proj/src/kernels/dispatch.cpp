#include "stfrag/kernels.hpp"

#include "stfrag/errors.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace stfrag::kernels {

namespace {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool neon_available() {
#if defined(__aarch64__)
    return true;
#else
    return false;
#endif
}

Backend resolve_auto() {
    if (const char* env = std::getenv("STFRAG_KERNEL")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Backend::Avx2;
        if (std::strcmp(env, "neon") == 0 && neon_available()) return Backend::Neon;
    }
    if (avx2_available()) return Backend::Avx2;
    if (neon_available()) return Backend::Neon;
    return Backend::Scalar;
}

std::atomic<Backend> g_backend{Backend::Auto};

Backend current() {
    Backend b = g_backend.load(std::memory_order_relaxed);
    if (b == Backend::Auto) {
        b = resolve_auto();
        g_backend.store(b, std::memory_order_relaxed);
    }
    return b;
}

} // namespace

Backend active_backend() { return current(); }

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::Auto: return "auto";
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "?";
}

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_available())
        throw domain_error("avx2 backend not available on this CPU");
    if (b == Backend::Neon && !neon_available())
        throw domain_error("neon backend not available on this CPU");
    g_backend.store(b == Backend::Auto ? resolve_auto() : b,
                    std::memory_order_relaxed);
}

double exp_weighted_sum(const double* a, const double* w, std::size_t n, double x) {
    switch (current()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::Avx2:
            return detail::exp_weighted_sum_avx2(a, w, n, x);
#endif
#if defined(__aarch64__)
        case Backend::Neon:
            return detail::exp_weighted_sum_neon(a, w, n, x);
#endif
        default:
            return detail::exp_weighted_sum_scalar(a, w, n, x);
    }
}

double osc_weighted_sum(const double* re, const double* im, std::size_t n, double theta,
                        std::size_t k0) {
    switch (current()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::Avx2:
            return detail::osc_weighted_sum_avx2(re, im, n, theta, k0);
#endif
#if defined(__aarch64__)
        case Backend::Neon:
            return detail::osc_weighted_sum_neon(re, im, n, theta, k0);
#endif
        default:
            return detail::osc_weighted_sum_scalar(re, im, n, theta, k0);
    }
}

} // namespace stfrag::kernels
