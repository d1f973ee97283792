#include "stfrag/frag.hpp"
#include "stfrag/sampler.hpp"
#include "stfrag/stable_density.hpp"
#include "stfrag/rho_inversion.hpp"
#include "stfrag/stats.hpp"
#include "stfrag/numerics.hpp"
#include <cmath>
#include <cstdio>
using namespace stfrag;

int main() {
    setvbuf(stdout, nullptr, _IOLBF, 0);
    auto p = derive_constants(1.5);
    const double t = 0.3;
    auto sg = semigroup_table(p, t);

    // quadrature CDF of the size-biased fragment: F*(s) = int weight(z) SBD_z(s) dz
    auto sb_cdf = [&](double s_cut) {
        // integrate over z with the table's own grid weights
        const auto& tab = sg->table();
        double acc = 0.0;
        for (std::size_t i = 1; i < tab.grid.size(); ++i) {
            const double z = 0.5 * (tab.grid[i] + tab.grid[i - 1]);
            const double wz = 0.5 * (tab.pdf[i] + tab.pdf[i - 1]) * (tab.grid[i] - tab.grid[i - 1]);
            if (wz <= 0) continue;
            // CDF of lastint density at s_cut for this z (quadrature in w-space)
            const double kappa = p.alpha / (p.alpha - 1.0);
            const double wcut = std::pow(s_cut, 1.0 / kappa);
            int m = 400;
            double num = 0, den = 0;
            auto sd = StableDensity::get(1.0 / p.alpha);
            const double u = std::pow(z, -p.alpha);
            for (int k = 0; k < m; ++k) {
                double w = (k + 0.5) / m;
                double rest = u * (1.0 - std::pow(w, kappa));
                double g = rest > 0 ? sd->density(rest) : 0.0;
                den += g;
                if (w <= wcut) num += g;
            }
            acc += wz * (den > 0 ? num / den : 0.0);
        }
        return acc / sg->normalization();
    };

    // empirical: semigroup first pick (exactly size-biased)
    {
        RngStream r(31, 1);
        int n = 30000;
        std::vector<double> s1(n);
        auto fam = ConditionedPickFamily::get(p);
        for (int i = 0; i < n; ++i) {
            double z = sample_semigroup_z(p, t, r);
            double u0 = std::pow(z, -p.alpha);
            s1[i] = fam->pick_u(u0, r) / u0;
        }
        auto rep = ks_test(std::move(s1), sb_cdf, 0.01, "semi_sb");
        std::printf("semigroup first-pick vs quadrature: D=%.5f p=%.4f\n", rep.statistic, rep.p_value);
    }
    // empirical: path fragment covering a uniform point
    {
        RngStream r(31, 2);
        int n = 1500;
        std::vector<double> s1; s1.reserve(n);
        PathFragOptions po; po.eps = 4e-3;
        std::vector<double> grid = {t};
        for (int i = 0; i < n; ++i) {
            auto tr = frag_path_level(p, grid, po, r.substream(40, i));
            const auto& mp = tr.states[0];
            double uu = r.uniform(), accum = 0.0, pick = -1.0;
            for (double v : mp.parts) { accum += v; if (uu <= accum) { pick = v; break; } }
            if (pick < 0) { --i; continue; } // landed in slide dust; redraw
            s1.push_back(pick);
        }
        auto rep = ks_test(std::move(s1), sb_cdf, 0.01, "path_sb");
        std::printf("path uniform-point fragment vs quadrature: D=%.5f p=%.4f (n=%d)\n",
                    rep.statistic, rep.p_value, n);
    }
    return 0;
}
