#ifndef STFRAG_RHO_INVERSION_HPP
#define STFRAG_RHO_INVERSION_HPP

#include "stfrag/density_table.hpp"
#include "stfrag/stable_params.hpp"

#include <memory>

namespace stfrag {

struct RhoBuildOptions {
    // adaptive stopping tolerance on the normalization checks
    double norm_tol = 1e-4;
    // when > 0, extend the grid until the analytic tail-mean error is safely
    // below this relative tolerance on the mean
    double mean_rel_tol = 0.0;
    // when > 0 the table only has to cover z in [0, z_hi]; the far tail is
    // served by the Levy-density asymptote
    double z_hi = 0.0;
    int grid_points = 900;
    int max_rounds = 3;
    int threads = 0; // 0 = default
};

// Density of the level-t marked-jump sum at unit time, by trapezoidal
// Fourier inversion of its characteristic function.
//
// The inversion runs in the standardized variable y = z * t^{-1/(alpha-1)},
// whose characteristic function decays like exp(-alpha cos((alpha-1)pi/2)
// u^{alpha-1}) uniformly in t, and on an exponentially tilted version of the
// law so that the algebraically heavy tail cannot alias back into the grid.
// Grid length, spacing, truncation and tilt are chosen from analytic
// envelopes and refined until the normalization checks pass.
class RhoTable {
public:
    RhoTable(const StableParams& p, double t, RhoBuildOptions opt = {});

    const StableParams& params() const { return params_; }
    double t() const { return t_; }
    double scale() const { return c_; } // y = scale * z

    // density in z units; beyond the grid falls back to the Levy tail
    double density(double z) const;
    // Levy-density asymptote in z units (tail approximation)
    double levy_density(double z) const;
    double grid_z_max() const { return table_.grid.back() / c_; }

    // integral of the grid density plus the analytic tail estimate
    double normalization() const;
    // same for the first moment, in z units; exact value is alpha*t^(alpha-1)
    double mean() const;
    double mean_exact() const;

    // standardized-units table (grid in y)
    const DensityTable& table() const { return table_; }

    double achieved_norm_err() const { return achieved_norm_err_; }

    // level-measure tail integrals in y units, plus mean-shifted
    // second-order estimates of the actual tail mass and tail mean
    double nu_bar_y(double y) const;
    double nu_tail_mean_y(double y) const;
    double nu_density_y(double y) const;
    double tail_mass2_y(double y) const;
    double tail_mean2_y(double y) const;

private:
    void build(const RhoBuildOptions& opt);
    bool build_round(double y_max, double sigma, double big_l, double big_u,
                     int grid_points, int threads, double norm_tol,
                     double mean_rel_tol, double* norm_err);

    StableParams params_;
    double t_;
    double c_;       // standardization scale t^{-1/(alpha-1)}
    double mean_y_;  // exact mean in y units
    DensityTable table_;
    double achieved_norm_err_ = 0.0;
    double tail_mass_y_ = 0.0;  // analytic nu-bar at the grid end
};

// Memoized access (build once, read many).
std::shared_ptr<const RhoTable> rho_table(const StableParams& p, double t,
                                          RhoBuildOptions opt = {});

// Density of the marked-jump sum at unit time (table-backed, memoized).
double rho_density(const StableParams& p, double t, double z);

// exp(-t^alpha + t z) p_1(-z) rho_t(z) / c_small: the density, in the split
// variable z, behind the one-time marginal of the fragmentation.
double semigroup_weight(const StableParams& p, double t, double z);

// Sampling table for the split variable: Fourier-inverted body stitched to
// an analytic Levy tail, with the exponential weight applied throughout.
class SemigroupTable {
public:
    SemigroupTable(const StableParams& p, double t);

    double t() const { return t_; }
    double weight(double z) const;      // tabulated integrand
    double normalization() const;       // should be 1 to builder tolerance
    double sample_z(double u) const;    // inverse-CDF draw, u in [0,1)
    const DensityTable& table() const { return table_; }
    double stitch_gap() const { return stitch_gap_; }

private:
    StableParams params_;
    double t_;
    DensityTable table_; // z units, raw (unnormalized) weight as pdf
    double stitch_gap_ = 0.0;
};

std::shared_ptr<const SemigroupTable> semigroup_table(const StableParams& p, double t);

} // namespace stfrag

#endif
