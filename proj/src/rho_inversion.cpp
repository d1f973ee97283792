#include "stfrag/rho_inversion.hpp"

#include "stfrag/errors.hpp"
#include "stfrag/kernels.hpp"
#include "stfrag/numerics.hpp"
#include "stfrag/parallel.hpp"
#include "stfrag/stable_density.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <mutex>
#include <vector>

namespace stfrag {

namespace {

// principal-branch complex power via the polar form
inline void cpow_polar(double re, double im, double expo, double& pr, double& pim) {
    const double r2 = re * re + im * im;
    const double lr = 0.5 * std::log(r2);
    const double th = std::atan2(im, re);
    const double m = std::exp(expo * lr);
    pr = m * std::cos(expo * th);
    pim = m * std::sin(expo * th);
}

// (1+zeta)^a - 1 to full relative accuracy for small |zeta|
inline std::complex<double> pow1p_m1(std::complex<double> zeta, double a) {
    const double az = std::abs(zeta);
    std::complex<double> l;
    if (az < 1e-2) {
        // log1p series: zeta*(1 - zeta/2 + zeta^2/3 - ...)
        std::complex<double> acc(0.0, 0.0);
        for (int k = 7; k >= 1; --k)
            acc = (((k % 2 == 1) ? 1.0 : -1.0) / k) + acc * zeta;
        l = zeta * acc;
    } else {
        l = std::log(1.0 + zeta);
    }
    const std::complex<double> e = a * l;
    if (std::abs(e) < 2e-2) {
        // expm1 series: e*(1 + e/2*(1 + e/3*(...)))
        std::complex<double> acc(1.0, 0.0);
        for (int k = 7; k >= 2; --k) acc = 1.0 + acc * e / static_cast<double>(k);
        return e * acc;
    }
    return std::exp(e) - 1.0;
}

struct PsiY {
    double alpha, c, t, t_pow;

    // Re/Im of (lam c + t)^a - (lam c)^a - t^a at lam = sigma - i u.
    // When t << |lam c| the two powers cancel catastrophically, so the
    // difference is computed as (lam c)^a * ((1 + t/(lam c))^a - 1).
    void eval(double sigma, double u, double& re, double& im) const {
        const double wr = sigma * c, wi = -u * c;
        const double wmag = std::hypot(wr, wi);
        if (t < 0.25 * wmag) {
            double br, bi;
            cpow_polar(wr, wi, alpha, br, bi);
            const std::complex<double> zeta =
                t * std::complex<double>(wr, -wi) / (wmag * wmag);
            const std::complex<double> d =
                std::complex<double>(br, bi) * pow1p_m1(zeta, alpha);
            re = d.real() - t_pow;
            im = d.imag();
            return;
        }
        double ar, ai, br, bi;
        cpow_polar(wr + t, wi, alpha, ar, ai);
        if (wr == 0.0 && wi == 0.0) {
            br = bi = 0.0;
        } else {
            cpow_polar(wr, wi, alpha, br, bi);
        }
        re = ar - br - t_pow;
        im = ai - bi;
    }
    double real_at(double sigma) const {
        const double w = sigma * c;
        if (t < 0.25 * w)
            return std::pow(w, alpha) * std::expm1(alpha * std::log1p(t / w)) - t_pow;
        return std::pow(w + t, alpha) - std::pow(w, alpha) - t_pow;
    }
};

} // namespace

RhoTable::RhoTable(const StableParams& p, double t, RhoBuildOptions opt)
    : params_(p), t_(t) {
    if (!(t > 0.0)) throw domain_error("RhoTable: t must be positive");
    c_ = std::pow(t, -1.0 / (p.alpha - 1.0));
    mean_y_ = c_ * p.alpha * std::pow(t, p.alpha - 1.0);
    build(opt);
}

double RhoTable::nu_bar_y(double y) const {
    const double a = params_.alpha;
    const double s = t_ / c_;
    const double amp = params_.c_big * std::pow(c_, a);
    const double v_split = std::max(y, 60.0 / s);
    double mid = 0.0;
    if (v_split > y * (1.0 + 1e-12)) {
        mid = num::adaptive_simpson(
            [&](double lv) {
                const double v = std::exp(lv);
                return (1.0 - std::exp(-s * v)) * std::pow(v, -a);
            },
            std::log(y), std::log(v_split), 1e-14, 1e-10);
    }
    return amp * (mid + std::pow(v_split, -a) / a);
}

double RhoTable::nu_density_y(double y) const {
    const double s_ = t_ / c_;
    return params_.c_big * std::pow(c_, params_.alpha) * (1.0 - std::exp(-s_ * y)) *
           std::pow(y, -1.0 - params_.alpha);
}

// Second-order tail estimates: mass above y sits on one macroscopic jump
// plus an independent copy of the bulk, so the plain Levy integrals are
// shifted by the mean.
double RhoTable::tail_mass2_y(double y) const {
    return nu_bar_y(y) + mean_y_ * nu_density_y(y);
}

double RhoTable::tail_mean2_y(double y) const {
    return nu_tail_mean_y(y) + mean_y_ * (nu_bar_y(y) + y * nu_density_y(y));
}

double RhoTable::nu_tail_mean_y(double y) const {
    const double a = params_.alpha;
    const double s = t_ / c_;
    const double amp = params_.c_big * std::pow(c_, a);
    const double v_split = std::max(y, 60.0 / s);
    double mid = 0.0;
    if (v_split > y * (1.0 + 1e-12)) {
        mid = num::adaptive_simpson(
            [&](double lv) {
                const double v = std::exp(lv);
                return (1.0 - std::exp(-s * v)) * std::pow(v, 1.0 - a);
            },
            std::log(y), std::log(v_split), 1e-14, 1e-10);
    }
    return amp * (mid + std::pow(v_split, 1.0 - a) / (a - 1.0));
}

void RhoTable::build(const RhoBuildOptions& opt) {
    const double a = params_.alpha;
    const double y_bulk = std::min(mean_y_, std::pow(a, 1.0 / (a - 1.0)));

    double y_max = std::max(30.0 * y_bulk, 10.0);
    const double nu_target = (opt.z_hi > 0.0) ? 0.02 : 2.5e-3;
    const double y_cap = (opt.z_hi > 0.0) ? std::max(c_ * opt.z_hi, 10.0) : 3e7;
    while (y_max < y_cap && nu_bar_y(y_max) > nu_target) y_max *= 1.3;
    if (opt.mean_rel_tol > 0.0) {
        while (y_max < y_cap &&
               2.0 * nu_bar_y(y_max) * nu_tail_mean_y(y_max) >
                   0.3 * opt.mean_rel_tol * mean_y_)
            y_max *= 1.3;
    }
    y_max = std::min(y_max, y_cap);

    const int threads = opt.threads > 0 ? opt.threads : par::default_threads();
    double norm_err = 0.0;
    for (int round = 0; round < opt.max_rounds; ++round) {
        const double sigma = 12.0 / y_max;
        const double big_l = (y_max + std::max(40.0 / sigma, 0.35 * y_max)) *
                             std::pow(1.45, round);
        // truncation level on the characteristic exponent, including the
        // re-amplification of the tilt and the slow-decay integral factor
        PsiY psi{a, c_, t_, std::pow(t_, a)};
        const double psi0 = psi.real_at(sigma);
        double lambda = 36.0 + sigma * y_max + 4.0 * round;
        const double decay = a * std::cos((a - 1.0) * M_PI_2);
        double big_u = std::pow(lambda / decay, 1.0 / (a - 1.0));
        lambda += std::max(0.0, (2.0 - a) * std::log(big_u));
        // solve Re[psi(sigma - iu)] - psi0 = lambda by bisection
        {
            double lo = 0.0, hi = std::pow(lambda / decay, 1.0 / (a - 1.0));
            double re, im;
            psi.eval(sigma, hi, re, im);
            while (re - psi0 < lambda && hi < 1e12) {
                hi *= 2.0;
                psi.eval(sigma, hi, re, im);
            }
            for (int i = 0; i < 60; ++i) {
                const double mid = 0.5 * (lo + hi);
                psi.eval(sigma, mid, re, im);
                if (re - psi0 < lambda)
                    lo = mid;
                else
                    hi = mid;
            }
            big_u = hi;
        }
        const int grid_points = static_cast<int>(opt.grid_points * std::pow(1.3, round));
        if (build_round(y_max, sigma, big_l, big_u, grid_points, threads,
                        opt.norm_tol, opt.mean_rel_tol, &norm_err)) {
            achieved_norm_err_ = norm_err;
            table_.build_params["rounds"] = round + 1;
            return;
        }
    }
    throw numeric_accuracy_error("rho inversion failed to meet its normalization target",
                                 norm_err, opt.norm_tol);
}

bool RhoTable::build_round(double y_max, double sigma, double big_l, double big_u,
                           int grid_points, int threads, double norm_tol,
                           double mean_rel_tol, double* norm_err) {
    const double a = params_.alpha;
    const double du = 2.0 * M_PI / big_l;
    const std::size_t big_k = static_cast<std::size_t>(big_u / du) + 1;
    if (big_k > 120000000ull)
        throw resource_error("rho inversion frequency grid exceeds budget; "
                             "choose a larger t or coarser tolerance");

    // y grid: uniform over the bulk, then log-stretched to y_max
    const double y_bulk = std::min(mean_y_, std::pow(a, 1.0 / (a - 1.0)));
    const double body_end = std::min(8.0 * y_bulk, y_max);
    std::vector<double> ygrid;
    ygrid.reserve(grid_points);
    const bool split = body_end < 0.999 * y_max;
    const int n1 = split ? (grid_points * 7) / 10 : grid_points;
    for (int i = 0; i < n1; ++i) ygrid.push_back(body_end * i / (n1 - 1));
    if (split) {
        const int n2 = grid_points - n1;
        const double lr = std::log(y_max / body_end) / n2;
        for (int i = 1; i <= n2; ++i) ygrid.push_back(body_end * std::exp(lr * i));
        ygrid.back() = y_max;
    }
    const std::size_t ny = ygrid.size();

    PsiY psi{a, c_, t_, std::pow(t_, a)};
    const double psi0 = psi.real_at(sigma);

    std::vector<double> acc(ny, 0.5); // k = 0 trapezoid term, phi(0) = 1
    constexpr std::size_t kChunk = 1u << 19;
    std::vector<double> re(kChunk), im(kChunk);
    for (std::size_t k0 = 1; k0 <= big_k; k0 += kChunk) {
        const std::size_t k1 = std::min(big_k + 1, k0 + kChunk);
        const std::size_t n = k1 - k0;
        par::parallel_for(0, n, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t q = lo; q < hi; ++q) {
                const double u = static_cast<double>(k0 + q) * du;
                double er, ei;
                psi.eval(sigma, u, er, ei);
                const double m = std::exp(-(er - psi0));
                double pr = m * std::cos(ei);
                double pim = -m * std::sin(ei);
                if (k0 + q == big_k) { // trapezoid end weight
                    pr *= 0.5;
                    pim *= 0.5;
                }
                re[q] = pr;
                im[q] = pim;
            }
        });
        par::parallel_for(0, ny, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t j = lo; j < hi; ++j)
                acc[j] += kernels::osc_weighted_sum(re.data(), im.data(), n,
                                                    du * ygrid[j], k0);
        });
    }

    std::vector<double> rho_sig(ny);
    double peak = 0.0, most_negative = 0.0;
    std::size_t neg_at = 0;
    for (std::size_t j = 0; j < ny; ++j) {
        rho_sig[j] = acc[j] * du / M_PI;
        peak = std::max(peak, rho_sig[j]);
        if (rho_sig[j] < most_negative) {
            most_negative = rho_sig[j];
            neg_at = j;
        }
    }
    if (most_negative < -1e-6 * peak) {
        if (std::getenv("STFRAG_RHO_DEBUG"))
            std::fprintf(stderr,
                         "[rho] t=%g NEGATIVE rho_sig %.3e (peak %.3e) at y=%g "
                         "(ymax=%g sigma=%g du=%g U=%g K=%zu)\n",
                         t_, most_negative, peak, ygrid[neg_at], y_max, sigma, du,
                         big_u, big_k);
        *norm_err = -most_negative / peak;
        return false;
    }

    DensityTable tab;
    tab.alpha = a;
    tab.t = t_;
    tab.grid = ygrid;
    tab.pdf.resize(ny);
    for (std::size_t j = 0; j < ny; ++j)
        tab.pdf[j] = std::max(0.0, rho_sig[j]) * std::exp(sigma * ygrid[j] - psi0);
    tab.finalize_from_pdf();
    tab.build_params = {{"sigma", sigma},  {"du", du},          {"K", big_k},
                        {"L", big_l},      {"y_max", y_max},    {"scale", c_},
                        {"points", static_cast<int>(ny)}};

    // discretization check on the tilted density, whose tail is exponentially
    // small beyond the grid
    double tilted_total = 0.0;
    for (std::size_t j = 1; j < ny; ++j)
        tilted_total += 0.5 * (std::max(0.0, rho_sig[j]) + std::max(0.0, rho_sig[j - 1])) *
                        (ygrid[j] - ygrid[j - 1]);
    const double m_sigma = std::exp(-psi0);
    const double tilted_tail =
        num::adaptive_simpson(
            [&](double lv) {
                const double v = std::exp(lv);
                const double s = t_ / c_;
                return std::exp(-sigma * v) * params_.c_big * std::pow(c_, a) *
                       (1.0 - std::exp(-s * v)) * std::pow(v, -a);
            },
            std::log(y_max), std::log(y_max + 80.0 / sigma), 1e-15, 1e-10) /
        m_sigma;
    double err = std::abs(tilted_total + tilted_tail - 1.0);

    const double nu_tail = nu_bar_y(y_max);
    if (nu_tail <= 7e-3)
        err = std::max(err, std::abs(tab.total_mass() + tail_mass2_y(y_max) - 1.0));
    double mean_err = 0.0;
    if (mean_rel_tol > 0.0) {
        double grid_mean = 0.0;
        for (std::size_t j = 1; j < ny; ++j)
            grid_mean += 0.5 *
                         (tab.pdf[j] * ygrid[j] + tab.pdf[j - 1] * ygrid[j - 1]) *
                         (ygrid[j] - ygrid[j - 1]);
        mean_err = std::abs(grid_mean + tail_mean2_y(y_max) - mean_y_) / mean_y_;
    }

    if (std::getenv("STFRAG_RHO_DEBUG")) {
        std::fprintf(stderr,
                     "[rho] t=%g ymax=%g sigma=%g L=%g U=%g K=%zu pts=%zu | tilted=%.8f "
                     "tilted_tail=%.3e untilted=%.8f nu_tail=%.3e err=%.3e mean_err=%.3e\n",
                     t_, y_max, sigma, big_l, big_u, big_k, ny, tilted_total,
                     tilted_tail, tab.total_mass(), nu_tail, err, mean_err);
    }
    *norm_err = std::max(err, mean_err);
    if (err > norm_tol || mean_err > mean_rel_tol) return false;
    table_ = std::move(tab);
    tail_mass_y_ = tail_mass2_y(y_max);
    return true;
}

double RhoTable::density(double z) const {
    if (!(z >= 0.0)) throw domain_error("rho density: z must be nonnegative");
    const double y = c_ * z;
    if (y <= table_.grid.back()) return c_ * table_.pdf_at(y);
    return levy_density(z);
}

double RhoTable::levy_density(double z) const {
    if (!(z > 0.0)) return 0.0;
    return params_.c_big * (1.0 - std::exp(-t_ * z)) * std::pow(z, -1.0 - params_.alpha);
}

double RhoTable::normalization() const { return table_.total_mass() + tail_mass_y_; }

double RhoTable::mean() const {
    double grid_mean = 0.0;
    for (std::size_t j = 1; j < table_.grid.size(); ++j)
        grid_mean += 0.5 *
                     (table_.pdf[j] * table_.grid[j] +
                      table_.pdf[j - 1] * table_.grid[j - 1]) *
                     (table_.grid[j] - table_.grid[j - 1]);
    return (grid_mean + tail_mean2_y(table_.grid.back())) / c_;
}

double RhoTable::mean_exact() const {
    return params_.alpha * std::pow(t_, params_.alpha - 1.0);
}

namespace {

struct RhoKey {
    long long a, t, zhi, mtol;
    int pts;
    bool operator<(const RhoKey& o) const {
        return std::tie(a, t, zhi, mtol, pts) < std::tie(o.a, o.t, o.zhi, o.mtol, o.pts);
    }
};

long long bits_of(double v) {
    long long r;
    std::memcpy(&r, &v, sizeof(r));
    return r;
}

} // namespace

std::shared_ptr<const RhoTable> rho_table(const StableParams& p, double t,
                                          RhoBuildOptions opt) {
    static std::map<RhoKey, std::shared_ptr<const RhoTable>> cache;
    static std::mutex mu;
    const RhoKey key{bits_of(p.alpha), bits_of(t), bits_of(opt.z_hi),
                     bits_of(opt.mean_rel_tol), opt.grid_points};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_shared<const RhoTable>(p, t, opt)).first;
    return it->second;
}

double rho_density(const StableParams& p, double t, double z) {
    return rho_table(p, t)->density(z);
}

double semigroup_weight(const StableParams& p, double t, double z) {
    if (!(t > 0.0)) throw domain_error("semigroup_weight: t must be positive");
    if (!(z > 0.0)) throw domain_error("semigroup_weight: z must be positive");
    const double lw = -std::pow(t, p.alpha) + t * z + log_p_density(p, 1.0, -z) -
                      std::log(p.c_small);
    return std::exp(lw) * rho_density(p, t, z);
}

SemigroupTable::SemigroupTable(const StableParams& p, double t) : params_(p), t_(t) {
    if (!(t > 0.0)) throw domain_error("SemigroupTable: t must be positive");
    const double a = p.alpha;
    const double mean_z = a * std::pow(t, a - 1.0);

    // support scan on the smooth envelope exp(t z) p_1(-z)
    double z_hi = 1e-4, env_max = -1e300;
    for (double z = 1e-4; z < 2e4; z *= 1.12) {
        const double e = t * z + log_p_density(p, 1.0, -z);
        env_max = std::max(env_max, e);
        z_hi = z;
        if (e < env_max - 42.0 && z > 2.0 * mean_z && z > 1.0) break;
    }

    RhoBuildOptions ropt;
    ropt.z_hi = z_hi;
    auto rho = rho_table(p, t, ropt);
    const double zb = rho->grid_z_max();
    const double c = rho->scale();
    const double log_norm = -std::pow(t, a) - std::log(p.c_small);

    DensityTable tab;
    tab.alpha = a;
    tab.t = t;
    const auto& yg = rho->table().grid;
    for (std::size_t j = 0; j < yg.size(); ++j) {
        const double z = yg[j] / c;
        const double rho_z = c * rho->table().pdf[j];
        if (z <= 0.0 || rho_z <= 0.0) {
            tab.grid.push_back(z);
            tab.pdf.push_back(0.0);
            continue;
        }
        const double lw = log_norm + t * z + log_p_density(p, 1.0, -z);
        tab.grid.push_back(z);
        tab.pdf.push_back(std::exp(lw) * rho_z);
    }
    if (zb < 0.999 * z_hi) {
        // analytic Levy-tail continuation
        const int n2 = 220;
        const double lr = std::log(z_hi / zb) / n2;
        for (int i = 1; i <= n2; ++i) {
            const double z = zb * std::exp(lr * i);
            const double lw = log_norm + t * z + log_p_density(p, 1.0, -z);
            tab.grid.push_back(z);
            tab.pdf.push_back(std::exp(lw) * rho->levy_density(z));
        }
        const double body_end = rho->density(zb * 0.9999);
        const double tail_start = rho->levy_density(zb);
        stitch_gap_ = std::abs(body_end - tail_start) /
                      std::max({body_end, tail_start, 1e-300});
        if (stitch_gap_ > 0.5)
            throw numeric_accuracy_error("semigroup body/tail stitch mismatch",
                                         stitch_gap_, 0.5);
    }
    tab.finalize_from_pdf();
    tab.build_params = {{"z_hi", z_hi}, {"body_end", zb}, {"stitch_gap", stitch_gap_}};
    table_ = std::move(tab);

    const double total = table_.total_mass();
    if (std::abs(total - 1.0) > 6e-3)
        throw numeric_accuracy_error("semigroup weight normalization out of range",
                                     std::abs(total - 1.0), 6e-3);
}

double SemigroupTable::weight(double z) const { return table_.pdf_at(z); }

double SemigroupTable::normalization() const { return table_.total_mass(); }

double SemigroupTable::sample_z(double u) const { return table_.sample(u); }

std::shared_ptr<const SemigroupTable> semigroup_table(const StableParams& p, double t) {
    static std::map<std::pair<long long, long long>,
                    std::shared_ptr<const SemigroupTable>>
        cache;
    static std::mutex mu;
    const auto key = std::make_pair(bits_of(p.alpha), bits_of(t));
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_shared<const SemigroupTable>(p, t)).first;
    return it->second;
}

} // namespace stfrag
