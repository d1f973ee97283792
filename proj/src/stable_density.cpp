#include "stfrag/stable_density.hpp"

#include "stfrag/errors.hpp"
#include "stfrag/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <vector>

namespace stfrag {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogCutoff = 45.0; // integrand terms below peak*e^-45 are dropped
} // namespace

StableDensity::StableDensity(double beta) : beta_(beta), one_minus_beta_(1.0 - beta) {
    if (!(beta > 0.0 && beta < 1.0))
        throw domain_error("StableDensity: index must lie in (0,1)");
    log_a0_ = (beta_ * std::log(beta_) + one_minus_beta_ * std::log(one_minus_beta_)) /
              one_minus_beta_;
    a0_ = std::exp(log_a0_);
    tail_exp_ = (2.0 - beta_) / (2.0 * one_minus_beta_);

    // log q on [1, series_from], directly in tau = ln s
    {
        const double hi = std::log(series_from_);
        const int panels = std::max(8, static_cast<int>(std::ceil(hi / 0.5)));
        cheb_right_ = num::PiecewiseChebyshev(
            [this](double tau) { return log_density_direct(std::exp(tau)); }, 0.0, hi,
            panels, 12);
    }
    // residual after removing the exact left-tail factor on [s_floor, 1]
    {
        const double lo = std::log(s_floor_);
        const int panels = std::max(8, static_cast<int>(std::ceil(-lo / 0.5)));
        cheb_left_ = num::PiecewiseChebyshev(
            [this](double tau) {
                const double x = std::exp(-beta_ / one_minus_beta_ * tau);
                return log_density_direct(std::exp(tau)) + a0_ * x + tail_exp_ * tau;
            },
            lo, 0.0, panels, 12);
    }
    // self-check against the direct evaluator at off-node points
    {
        // The interpolant must track the direct evaluator to ~1e-9 in log
        // wherever the law carries mass; deep in the left tail the exponent
        // itself is only known to ~1e-11 relative, so the bar scales with it.
        double worst_bulk = 0.0, worst_s = 0.0, worst_all = 0.0;
        for (int i = 0; i < 160; ++i) {
            const double tau = std::log(s_floor_) +
                               (std::log(series_from_) - std::log(s_floor_)) * (i + 0.371) / 160.0;
            const double s = std::exp(tau);
            const double gap = std::abs(log_density(s) - log_density_direct(s));
            const double x = std::exp(-beta_ / one_minus_beta_ * tau);
            worst_all = std::max(worst_all, gap);
            if (x * a0_ <= 50.0 && gap > worst_bulk) {
                worst_bulk = gap;
                worst_s = s;
            }
        }
        fit_error_ = worst_all;
        if (worst_bulk > 1e-7)
            throw numeric_accuracy_error(
                "stable density interpolant check failed at s=" + std::to_string(worst_s),
                worst_bulk, 1e-9);
    }
    build_cdf();
}

double StableDensity::log_A(double u) const {
    if (u <= 0.0) return log_a0_;
    if (u < 1e-5) {
        const double c2 = (1.0 - beta_ * beta_ * beta_ -
                           one_minus_beta_ * one_minus_beta_ * one_minus_beta_) /
                          (6.0 * one_minus_beta_);
        return log_a0_ + c2 * u * u;
    }
    // sin(u) through pi-u on the right half to keep relative accuracy there
    const double su = (u > M_PI_2) ? std::sin(M_PI - u) : std::sin(u);
    return (beta_ * std::log(std::sin(beta_ * u)) +
            one_minus_beta_ * std::log(std::sin(one_minus_beta_ * u)) - std::log(su)) /
           one_minus_beta_;
}

double StableDensity::dlogA_du(double u) const {
    if (u < 1e-5) {
        const double c2 = (1.0 - beta_ * beta_ * beta_ -
                           one_minus_beta_ * one_minus_beta_ * one_minus_beta_) /
                          (6.0 * one_minus_beta_);
        return 2.0 * c2 * u;
    }
    const double su = (u > M_PI_2) ? std::sin(M_PI - u) : std::sin(u);
    const double cu = std::cos(u);
    return (beta_ * beta_ * std::cos(beta_ * u) / std::sin(beta_ * u) +
            one_minus_beta_ * one_minus_beta_ * std::cos(one_minus_beta_ * u) /
                std::sin(one_minus_beta_ * u) -
            cu / su) /
           one_minus_beta_;
}

double StableDensity::solve_logA(double target) const {
    if (target <= log_a0_) return 0.0;
    double lo = 0.0, hi = M_PI * (1.0 - 1e-15);
    if (log_A(hi) <= target) return hi;
    for (int i = 0; i < 52; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (log_A(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    // Newton polish
    double u = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
        const double d = dlogA_du(u);
        if (d <= 0.0) break;
        double un = u - (log_A(u) - target) / d;
        if (un <= lo || un >= hi) break;
        u = un;
    }
    return u;
}

double StableDensity::log_peak_integral(double x, int panels_per_side) const {
    const double lx = std::log(x);
    const double g0 = x * a0_;

    double u_star, t_peak;
    if (g0 >= 1.0) {
        u_star = 0.0;
        t_peak = log_a0_ - g0;
    } else {
        u_star = solve_logA(-lx);
        t_peak = -lx - 1.0;
    }

    // cutoffs where log A - xA falls kLogCutoff below the peak, found on the
    // g = xA axis (t = ln g - ln x - g)
    const double R = t_peak - kLogCutoff + lx;
    double g_hi = std::max(2.0, -R);
    for (int i = 0; i < 64; ++i) {
        const double gn = -R + std::log(g_hi);
        if (std::abs(gn - g_hi) < 1e-13 * g_hi) {
            g_hi = gn;
            break;
        }
        g_hi = gn;
    }
    const double u_hi = solve_logA(std::log(g_hi) - lx);

    double u_lo = 0.0;
    if (g0 < 1.0) {
        double g_lo = std::exp(std::min(R, -1.0));
        for (int i = 0; i < 50; ++i) {
            const double gn = std::exp(R + g_lo);
            if (std::abs(gn - g_lo) < 1e-13 * std::max(gn, 1e-300)) {
                g_lo = gn;
                break;
            }
            g_lo = gn;
        }
        if (g_lo > g0) u_lo = solve_logA(std::log(g_lo) - lx);
    }

    // geometric panels, finest at the peak, 20-point Gauss-Legendre each
    const auto& gl = num::gauss_legendre(20);
    std::vector<double> tval, wval;
    tval.reserve(2 * panels_per_side * 20);
    wval.reserve(2 * panels_per_side * 20);

    auto add_side = [&](double from, double to) {
        // |from| is the peak end; panel widths double moving toward `to`
        if (!(std::abs(to - from) > 0.0)) return;
        const double total = to - from;
        const double denom = std::pow(2.0, panels_per_side) - 1.0;
        double acc = 0.0;
        for (int p = 0; p < panels_per_side; ++p) {
            const double nxt = acc + std::pow(2.0, p);
            const double a = from + total * acc / denom;
            const double b = from + total * nxt / denom;
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (int i = 0; i < 20; ++i) {
                const double u = mid + half * gl.nodes[i];
                const double la = log_A(u);
                tval.push_back(la - x * std::exp(la));
                wval.push_back(std::abs(half) * gl.weights[i]);
            }
            acc = nxt;
        }
    };
    add_side(u_star, u_lo); // empty when u_lo == u_star == 0
    add_side(u_star, u_hi);

    double m = kNegInf;
    for (double t : tval) m = std::max(m, t);
    if (!(m > kNegInf)) return kNegInf;
    // sum_i w_i exp(t_i - m) through the kernel (arguments -(m - t_i) <= 0)
    std::vector<double> shifted(tval.size());
    for (std::size_t i = 0; i < tval.size(); ++i) shifted[i] = m - tval[i];
    const double s = kernels::exp_weighted_sum(shifted.data(), wval.data(), shifted.size(), 1.0);
    return m + std::log(s);
}

double StableDensity::log_integral(double x) const {
    double prev = log_peak_integral(x, 6);
    for (int panels = 12; panels <= 24; panels *= 2) {
        const double cur = log_peak_integral(x, panels);
        if (std::abs(cur - prev) < 1e-11 * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

double StableDensity::log_density_direct(double s) const {
    if (!(s > 0.0)) throw domain_error("stable density: s must be positive");
    const double ls = std::log(s);
    const double lx = -beta_ / one_minus_beta_ * ls;
    if (lx > 690.0) return kNegInf; // exponent factor underflows outright
    const double x = std::exp(lx);
    return std::log(beta_ / one_minus_beta_) - std::log(M_PI) - ls / one_minus_beta_ +
           log_integral(x);
}

double StableDensity::log_density_series(double s) const {
    if (!(s > 0.0)) throw domain_error("stable density: s must be positive");
    const double ls = std::log(s);
    const double lt1 = std::lgamma(beta_ + 1.0) + std::log(std::sin(M_PI * beta_)) -
                       (beta_ + 1.0) * ls;
    double acc = 0.0;
    int small_run = 0;
    for (int k = 1; k <= 500 && small_run < 2; ++k) {
        const double kb = k * beta_;
        const double sn = std::sin(M_PI * std::fmod(kb, 2.0));
        const double lt = std::lgamma(kb + 1.0) - std::lgamma(k + 1.0) +
                          std::log(std::abs(sn)) - (kb + 1.0) * ls;
        // sin(pi k beta) vanishes identically for rational beta, so a single
        // tiny term does not signal convergence; require two in a row.
        small_run = (lt - lt1 < -45.0 && k > 3) ? small_run + 1 : 0;
        const double sign = ((k % 2 == 1) ? 1.0 : -1.0) * (sn >= 0.0 ? 1.0 : -1.0);
        acc += sign * std::exp(lt - lt1);
    }
    if (!(acc > 0.0)) return kNegInf;
    return -std::log(M_PI) + lt1 + std::log(acc);
}

double StableDensity::log_density(double s) const {
    if (!(s > 0.0)) throw domain_error("stable density: s must be positive");
    if (s >= series_from_) return log_density_series(s);
    const double tau = std::log(s);
    if (s >= 1.0) return cheb_right_(tau);
    const double tau_cl = std::max(tau, std::log(s_floor_));
    const double x = std::exp(-beta_ / one_minus_beta_ * tau);
    if (-beta_ / one_minus_beta_ * tau > 690.0) return kNegInf;
    return cheb_left_(tau_cl) - a0_ * x - tail_exp_ * tau;
}

double StableDensity::density(double s) const {
    const double l = log_density(s);
    return (l == kNegInf) ? 0.0 : std::exp(l);
}

double StableDensity::upper_tail(double s) const {
    if (!(s > 0.0)) return 1.0;
    if (s < cdf_hi_) return std::max(0.0, 1.0 - cdf(s));
    // termwise integral of the tail series
    const double ls = std::log(s);
    double acc = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double kb = k * beta_;
        const double sn = std::sin(M_PI * std::fmod(kb, 2.0));
        const double lt = std::lgamma(kb + 1.0) - std::lgamma(k + 1.0) +
                          std::log(std::abs(sn)) - kb * ls - std::log(kb);
        const double sign = ((k % 2 == 1) ? 1.0 : -1.0) * (sn >= 0.0 ? 1.0 : -1.0);
        const double term = sign * std::exp(lt);
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc) && k > 3) break;
    }
    return std::max(0.0, acc / M_PI);
}

void StableDensity::build_cdf() {
    // left start where the exponential factor alone is ~1e-16
    const double x_left = 38.0 / a0_;
    const double s_left = 0.7 * std::pow(x_left, -one_minus_beta_ / beta_);
    cdf_lo_ = s_left;
    cdf_hi_ = 1e7;

    const int cells = 1400;
    const double l0 = std::log(s_left), l1 = std::log(cdf_hi_);
    std::vector<double> ls(cells + 1), F(cells + 1);
    double acc = 0.0;
    ls[0] = l0;
    F[0] = 0.0;
    for (int i = 0; i < cells; ++i) {
        const double a = l0 + (l1 - l0) * i / cells;
        const double b = l0 + (l1 - l0) * (i + 1) / cells;
        acc += num::gl_integrate(
            [this](double tau) {
                const double l = log_density(std::exp(tau));
                return (l == kNegInf) ? 0.0 : std::exp(l + tau);
            },
            a, b, 6);
        ls[i + 1] = b;
        F[i + 1] = acc;
    }
    const double tail = upper_tail(cdf_hi_);
    const double total = acc + tail;
    if (std::abs(total - 1.0) > 3e-7)
        throw numeric_accuracy_error("stable CDF normalization check failed",
                                     std::abs(total - 1.0), 3e-7);
    // enforce monotone values (quadrature noise can produce flat spots only)
    for (int i = 1; i <= cells; ++i) F[i] = std::max(F[i], F[i - 1]);
    cdf_ = num::MonotoneCubic(std::move(ls), std::move(F));
}

double StableDensity::cdf(double s) const {
    if (!(s > 0.0)) return 0.0;
    if (s <= cdf_lo_) return 0.0;
    if (s >= cdf_hi_) return std::max(0.0, 1.0 - upper_tail(s));
    return std::clamp(cdf_(std::log(s)), 0.0, 1.0);
}

std::shared_ptr<const StableDensity> StableDensity::get(double beta) {
    static std::map<long long, std::shared_ptr<const StableDensity>> cache;
    static std::mutex mu;
    long long key;
    static_assert(sizeof(key) == sizeof(beta));
    std::memcpy(&key, &beta, sizeof(key));
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_shared<const StableDensity>(beta)).first;
    return it->second;
}

double laplace_exponent(const StableParams& p, LaplaceKind kind, double t, double lambda) {
    if (!(lambda >= 0.0)) throw domain_error("laplace_exponent: lambda must be >= 0");
    switch (kind) {
        case LaplaceKind::X:
            return std::pow(lambda, p.alpha);
        case LaplaceKind::T:
            return std::pow(lambda, 1.0 / p.alpha);
        case LaplaceKind::Z_t:
            if (!(t >= 0.0)) throw domain_error("laplace_exponent: t must be >= 0");
            return std::pow(lambda + t, p.alpha) - std::pow(lambda, p.alpha) -
                   std::pow(t, p.alpha);
        case LaplaceKind::X_t:
            if (!(t >= 0.0)) throw domain_error("laplace_exponent: t must be >= 0");
            return std::pow(lambda + t, p.alpha) - std::pow(t, p.alpha);
    }
    throw domain_error("laplace_exponent: unknown kind");
}

double log_q_density(const StableParams& p, double x, double s) {
    if (!(x > 0.0)) throw domain_error("q_density: x must be positive");
    if (!(s > 0.0)) throw domain_error("q_density: s must be positive");
    const auto sd = StableDensity::get(1.0 / p.alpha);
    return sd->log_density(s * std::pow(x, -p.alpha)) - p.alpha * std::log(x);
}

double q_density(const StableParams& p, double x, double s) {
    const double l = log_q_density(p, x, s);
    return std::isfinite(l) ? std::exp(l) : 0.0;
}

double q_cdf(const StableParams& p, double x, double s) {
    if (!(x > 0.0)) throw domain_error("q_cdf: x must be positive");
    if (!(s > 0.0)) return 0.0;
    const auto sd = StableDensity::get(1.0 / p.alpha);
    return sd->cdf(s * std::pow(x, -p.alpha));
}

double log_p_density(const StableParams& p, double s, double x) {
    if (!(s > 0.0)) throw domain_error("p_density: s must be positive");
    if (x > 0.0) throw domain_error("p_density: positive arguments unsupported");
    if (x == 0.0) return std::log(p.c_small) - std::log(s) / p.alpha;
    const double ax = -x;
    return std::log(s) - std::log(ax) + log_q_density(p, ax, s);
}

double p_density(const StableParams& p, double s, double x) {
    const double l = log_p_density(p, s, x);
    return std::isfinite(l) ? std::exp(l) : 0.0;
}

double size_biased_density(const StableParams& p, double z, double s) {
    if (!(z > 0.0)) throw domain_error("size_biased_density: z must be positive");
    if (!(s > 0.0 && s < 1.0)) throw domain_error("size_biased_density: s must be in (0,1)");
    const double l = std::log(p.c_small) + std::log(z) + log_q_density(p, z, 1.0 - s) -
                     std::log(s) / p.alpha - log_q_density(p, z, 1.0);
    return std::isfinite(l) ? std::exp(l) : 0.0;
}

double rho_inf_moment(const StableParams& p, int k) {
    if (k < 1) throw domain_error("rho_inf_moment: k must be >= 1");
    return std::exp(std::lgamma(1.0 + (k - 1.0) / p.alpha) -
                    std::lgamma(1.0 - 1.0 / p.alpha));
}

} // namespace stfrag
