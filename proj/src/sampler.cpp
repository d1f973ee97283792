#include "stfrag/sampler.hpp"

#include "stfrag/errors.hpp"
#include "stfrag/numerics.hpp"
#include "stfrag/rho_inversion.hpp"
#include "stfrag/stable_density.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

namespace stfrag {

double sample_one_sided_stable(double index, double scale_laplace, RngStream& rng) {
    if (!(index > 0.0 && index < 1.0))
        throw domain_error("sample_one_sided_stable: index must be in (0,1)");
    if (!(scale_laplace > 0.0))
        throw domain_error("sample_one_sided_stable: scale must be positive");
    const double b = index;
    const double u = M_PI * rng.uniform();
    const double e = rng.exponential();
    const double log_a = (b * std::log(std::sin(b * u)) +
                          (1.0 - b) * std::log(std::sin((1.0 - b) * u)) -
                          std::log(std::sin(u))) /
                         (1.0 - b);
    const double draw = std::pow(std::exp(log_a) / e, (1.0 - b) / b);
    return std::pow(scale_laplace, 1.0 / b) * draw;
}

std::uint64_t poisson_draw(double lambda, RngStream& rng) {
    if (!(lambda >= 0.0)) throw domain_error("poisson_draw: lambda must be >= 0");
    if (lambda == 0.0) return 0;
    if (lambda < 10.0) {
        // inversion by multiplication
        const double limit = std::exp(-lambda);
        double prod = rng.uniform();
        std::uint64_t n = 0;
        while (prod > limit) {
            prod *= rng.uniform();
            ++n;
        }
        return n;
    }
    // PTRD transformed-rejection (Hormann)
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double k = kf;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * loglam - lambda - std::lgamma(k + 1.0))
            return static_cast<std::uint64_t>(kf);
    }
}

namespace {

constexpr std::uint64_t kBandLabelBias = 4096;
constexpr int kTopBandExponent = 7; // shared unbounded band above 2^7

struct Band {
    double lo, hi; // hi <= 0 marks the unbounded top band
    std::uint64_t label_a, label_b;
};

std::vector<Band> dyadic_bands(double eps) {
    std::vector<Band> bands;
    const int j_top = kTopBandExponent;
    int j0 = static_cast<int>(std::floor(std::log2(eps)));
    const double lowest = std::exp2(j0);
    for (int j = j0; j < j_top; ++j) {
        Band b;
        b.lo = std::max(eps, std::exp2(j));
        b.hi = std::exp2(j + 1);
        b.label_a = static_cast<std::uint64_t>(j + static_cast<int>(kBandLabelBias));
        if (eps > lowest && j == j0) {
            // partial lowest band: key by the exact eps bits so dyadic
            // refinements never touch the full bands above
            std::uint64_t bits;
            std::memcpy(&bits, &eps, sizeof(bits));
            b.label_b = bits;
        } else {
            b.label_b = 0;
        }
        bands.push_back(b);
    }
    bands.push_back({std::exp2(j_top), -1.0,
                     static_cast<std::uint64_t>(j_top + static_cast<int>(kBandLabelBias)), 0});
    return bands;
}

} // namespace

JumpLedger sample_jump_field(const StableParams& p, double horizon, double eps,
                             const RngStream& rng, std::size_t entry_budget) {
    if (!(horizon > 0.0)) throw domain_error("sample_jump_field: horizon must be positive");
    if (!(eps > 0.0 && eps < std::exp2(kTopBandExponent)))
        throw domain_error("sample_jump_field: eps out of range");
    const double a = p.alpha;
    const double expected = horizon * p.c_big * std::pow(eps, -a) / a;
    if (expected + 6.0 * std::sqrt(expected) > static_cast<double>(entry_budget))
        throw resource_error("sample_jump_field: expected jump count exceeds budget");

    JumpLedger led;
    led.horizon = horizon;
    led.drift_rate = -p.c_big * std::pow(eps, 1.0 - a) / (a - 1.0);
    led.entries.reserve(static_cast<std::size_t>(expected * 1.05) + 16);

    for (const Band& band : dyadic_bands(eps)) {
        RngStream sub = (band.label_b == 0)
                            ? rng.substream(band.label_a)
                            : rng.substream(band.label_a, band.label_b);
        const double lo_pow = std::pow(band.lo, -a);
        const double hi_pow = (band.hi > 0.0) ? std::pow(band.hi, -a) : 0.0;
        const double rate = horizon * p.c_big / a * (lo_pow - hi_pow);
        const std::uint64_t n = poisson_draw(rate, sub);
        for (std::uint64_t i = 0; i < n; ++i) {
            JumpEntry e;
            e.time = horizon * sub.uniform();
            const double u = sub.uniform();
            e.mag = std::pow(lo_pow - u * (lo_pow - hi_pow), -1.0 / a);
            e.clock = sub.exponential();
            led.entries.push_back(e);
        }
    }
    led.finalize();
    return led;
}

DensityTable conditioned_jump_table(const StableParams& p, double x, double total) {
    if (!(x > 0.0)) throw domain_error("conditioned_jump_table: x must be positive");
    if (!(total > 0.0)) throw domain_error("conditioned_jump_table: total must be positive");
    const double a = p.alpha;
    const double kappa = a / (a - 1.0);
    const double u = total * std::pow(x, -a);
    const auto sd = StableDensity::get(1.0 / a);

    const int n = 1025;
    DensityTable tab;
    tab.alpha = a;
    tab.t = x;
    tab.grid.resize(n);
    tab.pdf.resize(n);
    std::vector<double> lp(n, -1e300);
    double lmax = -1e300;
    for (int k = 0; k < n; ++k) {
        const double w = static_cast<double>(k) / (n - 1);
        tab.grid[k] = w;
        const double rest = u * (1.0 - std::pow(w, kappa));
        if (rest > 0.0) lp[k] = sd->log_density(rest);
        lmax = std::max(lmax, lp[k]);
    }
    for (int k = 0; k < n; ++k) tab.pdf[k] = std::exp(lp[k] - lmax);
    tab.finalize_from_pdf();
    const double z = tab.total_mass();
    if (!(z > 0.0))
        throw numeric_accuracy_error("conditioned_jump_table: degenerate table", 0.0, 1.0);
    for (auto& v : tab.pdf) v /= z;
    for (auto& v : tab.cdf) v /= z;
    tab.tail_mass = std::max(0.0, 1.0 - tab.cdf.back());
    tab.build_params = {{"coordinate", "w"},
                        {"transform", "y = total * w^(alpha/(alpha-1))"},
                        {"x", x},
                        {"total", total},
                        {"u", u}};
    return tab;
}

double sample_conditioned_jump(const StableParams& p, double x, double total,
                               RngStream& rng) {
    const DensityTable tab = conditioned_jump_table(p, x, total);
    const double w = tab.sample(rng.uniform());
    return std::min(total * std::pow(w, p.alpha / (p.alpha - 1.0)), total);
}

ConditionedPickFamily::ConditionedPickFamily(const StableParams& p) : params_(p) {
    const double a = p.alpha;
    const double beta = 1.0 / a;
    kappa_ = a / (a - 1.0);
    const auto sd = StableDensity::get(beta);

    // w-branch: CDF of the pick coordinate w over a log grid of u
    const int nu = 321, nw = 513;
    log_u_nodes_.resize(nu);
    const double lu_lo = std::log(u_table_lo()), lu_hi = std::log(u_mid());
    for (int j = 0; j < nu; ++j)
        log_u_nodes_[j] = lu_lo + (lu_hi - lu_lo) * j / (nu - 1);
    wgrid_.resize(nw);
    for (int k = 0; k < nw; ++k) wgrid_[k] = static_cast<double>(k) / (nw - 1);
    wcdf_.assign(nu, std::vector<double>(nw, 0.0));
    mean_frac_.assign(nu, 0.0);
    std::vector<double> pdf(nw);
    for (int j = 0; j < nu; ++j) {
        const double u = std::exp(log_u_nodes_[j]);
        double lmax = -1e300;
        std::vector<double> lp(nw, -1e300);
        for (int k = 0; k < nw; ++k) {
            const double rest = u * (1.0 - std::pow(wgrid_[k], kappa_));
            if (rest > 0.0) lp[k] = sd->log_density(rest);
            lmax = std::max(lmax, lp[k]);
        }
        for (int k = 0; k < nw; ++k) pdf[k] = std::exp(lp[k] - lmax);
        auto& cdf = wcdf_[j];
        for (int k = 1; k < nw; ++k)
            cdf[k] = cdf[k - 1] + 0.5 * (pdf[k] + pdf[k - 1]) * (wgrid_[k] - wgrid_[k - 1]);
        const double z = cdf[nw - 1];
        double mean = 0.0;
        for (int k = 1; k < nw; ++k)
            mean += 0.5 *
                    (pdf[k] * std::pow(wgrid_[k], kappa_) +
                     pdf[k - 1] * std::pow(wgrid_[k - 1], kappa_)) *
                    (wgrid_[k] - wgrid_[k - 1]);
        for (int k = 0; k < nw; ++k) cdf[k] /= z;
        mean_frac_[j] = mean / z;
    }

    // r-branch: CDF of the remaining total for large u, on nodes of u^{-beta}
    const std::vector<double> u_nodes = {1e3, 2e3, 5e3, 1e4, 3e4, 1e5, 1e6, 1e8, -1.0};
    const double a0 = (1.0 - beta) * std::pow(beta, beta / (1.0 - beta));
    const double r_lo = 0.5 * std::pow(a0 / 38.0, (1.0 - beta) / beta);
    const double r_hi = 1e9;
    const int nr = 640;
    lr_grid_.resize(nr);
    for (int k = 0; k < nr; ++k)
        lr_grid_[k] = std::log(r_lo) + (std::log(r_hi) - std::log(r_lo)) * k / (nr - 1);
    for (double un : u_nodes) {
        xi_nodes_.push_back(un > 0.0 ? std::pow(un, -beta) : 0.0);
        std::vector<double> cdf(nr, 0.0), pdf(nr, 0.0);
        for (int k = 0; k < nr; ++k) {
            const double r = std::exp(lr_grid_[k]);
            if (un > 0.0 && r >= un * (1.0 - 1e-12)) break;
            double lw = sd->log_density(r) + lr_grid_[k]; // integrand in ln r
            if (un > 0.0) lw -= std::log(1.0 - r / un) / a;
            pdf[k] = std::exp(lw);
        }
        for (int k = 1; k < nr; ++k)
            cdf[k] = cdf[k - 1] +
                     0.5 * (pdf[k] + pdf[k - 1]) * (lr_grid_[k] - lr_grid_[k - 1]);
        const double z = cdf[nr - 1];
        for (auto& v : cdf) v /= z;
        rcdf_.push_back(std::move(cdf));
    }
}

double ConditionedPickFamily::mean_pick_fraction(double u) const {
    if (u >= u_mid()) return 0.9;
    const double lu = std::clamp(std::log(u), log_u_nodes_.front(), log_u_nodes_.back());
    const double step = log_u_nodes_[1] - log_u_nodes_[0];
    const std::size_t j = std::min(
        log_u_nodes_.size() - 2,
        static_cast<std::size_t>(std::max(0.0, (lu - log_u_nodes_[0]) / step)));
    const double th = std::clamp((lu - log_u_nodes_[j]) / step, 0.0, 1.0);
    return (1.0 - th) * mean_frac_[j] + th * mean_frac_[j + 1];
}

double ConditionedPickFamily::pick_u(double u, RngStream& rng) const {
    if (u < u_mid()) {
        const double lu =
            std::clamp(std::log(u), log_u_nodes_.front(), log_u_nodes_.back());
        const double step = log_u_nodes_[1] - log_u_nodes_[0];
        const std::size_t j = std::min(
            log_u_nodes_.size() - 2,
            static_cast<std::size_t>(std::max(0.0, (lu - log_u_nodes_[0]) / step)));
        const double th = std::clamp((lu - log_u_nodes_[j]) / step, 0.0, 1.0);
        const auto& c0 = wcdf_[j];
        const auto& c1 = wcdf_[j + 1];
        const double target = rng.uniform();
        // binary search on the mixed CDF
        std::size_t lo = 0, hi = wgrid_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            const double g = (1.0 - th) * c0[mid] + th * c1[mid];
            (g < target ? lo : hi) = mid;
        }
        const double glo = (1.0 - th) * c0[lo] + th * c1[lo];
        const double ghi = (1.0 - th) * c0[hi] + th * c1[hi];
        const double frac = (ghi > glo) ? (target - glo) / (ghi - glo) : 0.5;
        const double w = wgrid_[lo] + frac * (wgrid_[hi] - wgrid_[lo]);
        return std::min(u, u * std::pow(w, kappa_));
    }

    // remaining-total branch
    const double beta = 1.0 / params_.alpha;
    const double xi = std::pow(u, -beta);
    std::size_t j = 0;
    while (j + 2 < xi_nodes_.size() && xi < xi_nodes_[j + 1]) ++j;
    const double x0 = xi_nodes_[j], x1 = xi_nodes_[j + 1];
    const double th = (x0 > x1) ? std::clamp((x0 - xi) / (x0 - x1), 0.0, 1.0) : 0.0;
    const auto& c0 = rcdf_[j];
    const auto& c1 = rcdf_[j + 1];
    auto mixed = [&](std::size_t k) { return (1.0 - th) * c0[k] + th * c1[k]; };
    // support ends at min(u, grid end)
    const double lr_max = std::min(std::log(u * (1.0 - 1e-12)), lr_grid_.back());
    std::size_t k_hi = lr_grid_.size() - 1;
    while (k_hi > 1 && lr_grid_[k_hi] > lr_max) --k_hi;
    const double total_mass = mixed(k_hi);
    const double target = rng.uniform() * total_mass;
    std::size_t lo = 0, hi = k_hi;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (mixed(mid) < target ? lo : hi) = mid;
    }
    const double glo = mixed(lo), ghi = mixed(hi);
    const double frac = (ghi > glo) ? (target - glo) / (ghi - glo) : 0.5;
    const double r = std::exp(lr_grid_[lo] + frac * (lr_grid_[hi] - lr_grid_[lo]));
    return std::max(0.0, u - std::min(r, u));
}

std::shared_ptr<const ConditionedPickFamily> ConditionedPickFamily::get(
    const StableParams& p) {
    static std::map<long long, std::shared_ptr<const ConditionedPickFamily>> cache;
    static std::mutex mu;
    long long key;
    std::memcpy(&key, &p.alpha, sizeof(key));
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_shared<const ConditionedPickFamily>(p)).first;
    return it->second;
}

MassPartition sample_conditioned_partition(const StableParams& p, double x, double total,
                                           double dust, RngStream& rng, double min_part) {
    if (!(x > 0.0) || !(total > 0.0))
        throw domain_error("sample_conditioned_partition: x and total must be positive");
    if (!(dust > 0.0 && dust < total))
        throw domain_error("sample_conditioned_partition: need 0 < dust < total");
    const auto fam = ConditionedPickFamily::get(p);
    const double xa = std::pow(x, p.alpha);
    double u = total / xa;
    const double u_dust = std::max(dust / xa, fam->u_floor());
    const double min_part_u = (min_part > 0.0) ? min_part / xa : 0.0;

    MassPartition mp;
    mp.total = total;
    double picked = 0.0;
    for (std::size_t it = 0; it < 1000000; ++it) {
        if (u <= u_dust) break;
        if (min_part_u > 0.0 && u < fam->u_mid() &&
            6.0 * u * fam->mean_pick_fraction(u) < min_part_u)
            break;
        const double du = fam->pick_u(u, rng);
        const double part = du * xa;
        if (part > 0.0) {
            mp.parts.push_back(part);
            picked += part;
        }
        u -= du;
        if (!(u > 0.0)) {
            u = 0.0;
            break;
        }
        if (it + 1 == 1000000)
            throw pathological_input_error(
                "sample_conditioned_partition: pick guard (1e6) tripped");
    }
    mp.remainder = std::max(0.0, total - picked);
    // the remainder bucket is the unpicked mass
    mp.remainder = std::min(mp.remainder, total);
    mp.rank_and_check();
    return mp;
}

JumpLedger sample_subordinator_bridge(const StableParams& p, double x, double total,
                                      double dust, RngStream& rng) {
    MassPartition mp = sample_conditioned_partition(p, x, total, dust, rng);
    JumpLedger led;
    led.horizon = 1.0;
    led.drift_rate = 0.0;
    led.entries.reserve(mp.parts.size());
    for (double part : mp.parts)
        led.entries.push_back({rng.uniform(), part, rng.exponential()});
    led.finalize();
    return led;
}

double sample_semigroup_z(const StableParams& p, double t, RngStream& rng) {
    return semigroup_table(p, t)->sample_z(rng.uniform());
}

MassPartition sample_semigroup_marginal(const StableParams& p, double t, double dust,
                                        RngStream& rng, double min_part) {
    if (!(t > 0.0)) throw domain_error("sample_semigroup_marginal: t must be positive");
    const double z = sample_semigroup_z(p, t, rng);
    return sample_conditioned_partition(p, z, 1.0, dust, rng, min_part);
}

DislocationSampler::DislocationSampler(const StableParams& p, double eps_cut, double dust)
    : params_(p), eps_cut_(eps_cut), dust_(dust) {
    if (!(eps_cut > 0.0 && eps_cut < 1.0))
        throw domain_error("DislocationSampler: eps_cut must be in (0,1)");
    if (!(dust > 0.0 && dust < 1.0))
        throw domain_error("DislocationSampler: dust must be in (0,1)");

    // calibrate x_lo so the bounded mass of the discarded region stays
    // below 1% of the estimated conditioned rate (pilot draws on an
    // internal stream so calibration is deterministic per parameter set)
    x_lo_ = 0.5;
    RngStream pilot(0x51ED2700DEADBEEFull,
                    RngStream::mix64(static_cast<std::uint64_t>(p.alpha * (1 << 20))) ^
                        RngStream::mix64(static_cast<std::uint64_t>(eps_cut * (1 << 20))));
    for (int iter = 0; iter < 22; ++iter) {
        build_proposal();
        std::uint64_t acc = 0;
        const int n_pilot = 600;
        for (int i = 0; i < n_pilot; ++i) {
            MassPartition mp = draw_internal(pilot, 0.0, true); // single attempt
            if (!mp.parts.empty()) ++acc;
        }
        const double p_acc = std::max(1.0, static_cast<double>(acc)) / n_pilot;
        const double lambda_guess = proposal_mass_ * p_acc;
        trunc_bound_ = bound_below(x_lo_);
        if (trunc_bound_ <= 0.01 * lambda_guess) break;
        x_lo_ *= 0.5;
    }
    trials_ = accepts_ = 0; // pilot draws do not count toward the estimate
}

double DislocationSampler::calibrate_lambda(std::size_t n_trials) {
    RngStream cal(0xCA11B7A7E5EEDull,
                  RngStream::mix64(static_cast<std::uint64_t>(params_.alpha * (1 << 22))) ^
                      RngStream::mix64(static_cast<std::uint64_t>(eps_cut_ * (1 << 22))));
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < n_trials; ++i) {
        MassPartition mp = draw_internal(cal, 0.0, true);
        if (!mp.parts.empty()) ++acc;
    }
    lambda_frozen_ = proposal_mass_ * static_cast<double>(acc) /
                     static_cast<double>(n_trials);
    return lambda_frozen_;
}

double DislocationSampler::bound_below(double x_lo) const {
    const double a = params_.alpha;
    // (1/eps) Int_0^{x_lo} h(x) E[1 - s1 | x] dx with
    // h(x) = (C/c) p1(-x) x^{-a} and E[1 - s1 | x] <= min(1, c a x/(a-1))
    const double bound =
        num::adaptive_simpson(
            [&](double lx) {
                const double x = std::exp(lx);
                const double h = params_.c_big / params_.c_small *
                                 std::exp(log_p_density(params_, 1.0, -x)) *
                                 std::pow(x, -a);
                const double e1s =
                    std::min(1.0, params_.c_small * a * x / (a - 1.0));
                return h * e1s * x; // d ln x
            },
            std::log(std::max(1e-9, x_lo * 1e-7)), std::log(x_lo), 1e-12, 1e-8) /
        eps_cut_;
    return bound;
}

void DislocationSampler::build_proposal() {
    const double a = params_.alpha;
    const auto sd = StableDensity::get(1.0 / a);
    const double v_hi = std::pow(x_lo_, -a);
    const double beta = 1.0 / a;
    const double a0 = (1.0 - beta) * std::pow(beta, beta / (1.0 - beta));
    const double v_lo = 0.3 * std::pow(a0 / 40.0, (1.0 - beta) / beta);

    const int n = 900;
    DensityTable tab;
    tab.alpha = a;
    tab.t = eps_cut_;
    tab.grid.resize(n);
    tab.pdf.resize(n);
    const double l0 = std::log(v_lo), l1 = std::log(v_hi);
    for (int k = 0; k < n; ++k) {
        const double lv = l0 + (l1 - l0) * k / (n - 1);
        const double v = std::exp(lv);
        tab.grid[k] = v;
        tab.pdf[k] = params_.d_const * v * sd->density(v);
    }
    tab.finalize_from_pdf();
    proposal_mass_ = tab.total_mass();
    // normalize to a probability table; the sigma-finite mass lives in
    // proposal_mass_
    for (auto& v : tab.pdf) v /= proposal_mass_;
    for (auto& v : tab.cdf) v /= proposal_mass_;
    tab.tail_mass = std::max(0.0, 1.0 - tab.cdf.back());
    tab.build_params = {{"x_lo", x_lo_}, {"v_hi", v_hi}, {"mass", proposal_mass_}};
    vtable_ = std::move(tab);
}

MassPartition DislocationSampler::draw_internal(RngStream& rng, double min_part,
                                                bool pilot) {
    const auto fam = ConditionedPickFamily::get(params_);
    for (std::size_t attempt = 0; attempt < 2000000; ++attempt) {
        if (!pilot) ++trials_;
        const double v = vtable_.sample(rng.uniform());
        const double xa = 1.0 / v; // x^alpha at the proposed split level
        double u = v;              // total 1 in u units
        double max_part = 0.0;
        MassPartition mp;
        mp.total = 1.0;
        double picked = 0.0;
        bool accepted = false, decided = false;
        const double u_dust = std::max(dust_ / xa, fam->u_floor());
        const double min_part_u = (min_part > 0.0) ? min_part / xa : 0.0;
        for (std::size_t it2 = 0; it2 < 1000000; ++it2) {
            const double remaining = u * xa;
            if (!decided) {
                if (1.0 - max_part <= eps_cut_) {
                    decided = true; // s1 >= max_part already too large
                    accepted = false;
                } else if (1.0 - std::max(max_part, remaining) > eps_cut_) {
                    decided = true;
                    accepted = true;
                }
            }
            if (decided && (!accepted || pilot)) break; // pilot only classifies
            if (u <= u_dust) break;
            if (decided && min_part_u > 0.0 && u < fam->u_mid() &&
                6.0 * u * fam->mean_pick_fraction(u) < min_part_u)
                break;
            const double du = fam->pick_u(u, rng);
            const double part = du * xa;
            if (part > 0.0) {
                mp.parts.push_back(part);
                picked += part;
                max_part = std::max(max_part, part);
            }
            u -= du;
            if (!(u > 0.0)) {
                u = 0.0;
                break;
            }
        }
        if (!decided) {
            // partition resolved to dust: classify on the realized largest
            accepted = (1.0 - std::max(max_part, u * xa) > eps_cut_);
        }
        if (accepted) {
            if (pilot) return MassPartition{{1.0}, 0.0, 1.0}; // acceptance flag only
            ++accepts_;
            mp.remainder = std::max(0.0, 1.0 - picked);
            mp.rank_and_check();
            return mp;
        }
        if (pilot) break; // pilot probes the per-trial rate only
        if (trials_ > 20000 &&
            static_cast<double>(accepts_) / static_cast<double>(trials_) < 1e-4)
            throw configuration_error(
                "DislocationSampler: acceptance rate below 1e-4; increase eps_cut");
    }
    if (pilot) return MassPartition{{}, 1.0, 1.0};
    throw configuration_error("DislocationSampler: rejection loop exhausted");
}

MassPartition DislocationSampler::draw(RngStream& rng, double min_part) {
    return draw_internal(rng, min_part, false);
}

double DislocationSampler::lambda_est() const {
    if (trials_ == 0) return 0.0;
    return proposal_mass_ * static_cast<double>(accepts_) / static_cast<double>(trials_);
}

double DislocationSampler::lambda_std_err() const {
    if (trials_ == 0) return 0.0;
    const double p = static_cast<double>(accepts_) / static_cast<double>(trials_);
    return proposal_mass_ * std::sqrt(std::max(p * (1.0 - p), 1e-12) /
                                      static_cast<double>(trials_));
}

MassPartition sample_small_time_limit(const StableParams& p, double dust, RngStream& rng) {
    if (!(dust > 0.0)) throw domain_error("sample_small_time_limit: dust must be positive");
    const double a = p.alpha;
    const double z = sample_one_sided_stable(a - 1.0, a, rng);
    // truncation level whose small-jump mean equals the dust budget
    const double y_cut =
        std::pow(dust * (a - 1.0) / (a * z * p.c_small), a / (a - 1.0));
    const double rate = z * p.c_small * a * std::pow(y_cut, -1.0 / a);
    if (rate > 5e7)
        throw resource_error("sample_small_time_limit: truncation level too small");
    const std::uint64_t n = poisson_draw(rate, rng);
    MassPartition mp;
    mp.parts.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i)
        mp.parts.push_back(y_cut * std::pow(rng.uniform(), -a));
    mp.remainder = dust;
    double s = dust;
    for (double v : mp.parts) s += v;
    mp.total = s;
    mp.rank_and_check();
    return mp;
}

} // namespace stfrag
