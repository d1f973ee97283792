#ifndef STFRAG_SAMPLER_HPP
#define STFRAG_SAMPLER_HPP

#include "stfrag/density_table.hpp"
#include "stfrag/mass_partition.hpp"
#include "stfrag/path_ops.hpp"
#include "stfrag/rng.hpp"
#include "stfrag/stable_params.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace stfrag {

// Exact draw of the positive stable law with transform
// exp(-scale_laplace * lambda^index), by the trigonometric (Kanter) method.
double sample_one_sided_stable(double index, double scale_laplace, RngStream& rng);

// Exact Poisson count (inversion for small means, PTRD rejection above).
std::uint64_t poisson_draw(double lambda, RngStream& rng);

// Truncated jump field on [0, horizon]: Poisson jumps with intensity
// c_big * x^{-1-alpha} dx above eps, iid uniform times, exponential mark
// clocks, and the compensator drift -c_big*eps^{1-alpha}/(alpha-1).
//
// Magnitudes are generated per dyadic band from substreams keyed by the
// band exponent, so refining eps along dyadic values adds only the new
// bands and keeps every existing jump bit-identical.
JumpLedger sample_jump_field(const StableParams& p, double horizon, double eps,
                             const RngStream& rng, std::size_t entry_budget = 40000000);

// The size-biased first-jump density given remaining total, tabulated on
// the substituted coordinate w = (y/total)^{(alpha-1)/alpha} where it is
// smooth and bounded (the y-space density carries an integrable
// singularity at 0).  grid holds w; build_params records the transform
// y = total * w^{alpha/(alpha-1)}.
DensityTable conditioned_jump_table(const StableParams& p, double x, double total);

// One size-biased pick from the jumps of the subordinator run to level x,
// given their total; inverse-CDF on the table above.
double sample_conditioned_jump(const StableParams& p, double x, double total,
                               RngStream& rng);

// Shared per-index engine for repeated conditioned picks.  The pick law
// depends on (x, total) only through u = total * x^{-alpha}; the engine
// tabulates the normalized pick CDF across a grid of u once per index:
//  - u <= 1e3: CDF in w on a log-u grid,
//  - u  > 1e3: CDF of the remaining total (which converges to the
//    unconditioned ladder-time law as u -> infinity) on a grid of u^{-beta}.
// Everything below u = 1e-3 is dust for every caller in this artifact:
// by the ranked-jump tail law, descending to u costs ~(1/u)^2 sequential
// picks, so the enumeration floor is what keeps partitions inside the
// 1e6-pick guard.  (The tables extend a decade below the floor so picks
// near it stay accurate.)
class ConditionedPickFamily {
public:
    explicit ConditionedPickFamily(const StableParams& p);

    // one pick, in u units; returns the picked mass du <= u
    double pick_u(double u, RngStream& rng) const;
    // mean pick fraction E[du/u] at u (w-branch range; ~1 above it)
    double mean_pick_fraction(double u) const;
    double u_floor() const { return 1e-3; }
    double u_table_lo() const { return 1e-4; }
    double u_mid() const { return 1e3; }

    static std::shared_ptr<const ConditionedPickFamily> get(const StableParams& p);

private:
    StableParams params_;
    double kappa_; // alpha/(alpha-1)
    // w-branch
    std::vector<double> log_u_nodes_;
    std::vector<double> wgrid_;
    std::vector<std::vector<double>> wcdf_;
    std::vector<double> mean_frac_;
    // r-branch
    std::vector<double> xi_nodes_; // u^{-beta}, descending to 0
    std::vector<double> lr_grid_;
    std::vector<std::vector<double>> rcdf_;
};

// Size-biased jump sequence given total, picks repeated until the remaining
// mass drops below `dust` (which becomes the remainder), ranked.  When
// min_part > 0, picking also stops once the expected scale of the next
// picks falls safely below min_part; the lumped masses are exactly the
// fragments a floor at min_part would freeze anyway.
MassPartition sample_conditioned_partition(const StableParams& p, double x, double total,
                                           double dust, RngStream& rng,
                                           double min_part = 0.0);

// The conditioned partition's jumps placed at iid uniform times on [0,1].
JumpLedger sample_subordinator_bridge(const StableParams& p, double x, double total,
                                      double dust, RngStream& rng);

// Draw of the split variable from the normalized one-time weight.
double sample_semigroup_z(const StableParams& p, double t, RngStream& rng);

// Exact draw of the fragmentation state at time t: split variable from the
// semigroup weight, then the conditioned partition given total 1.
MassPartition sample_semigroup_marginal(const StableParams& p, double t, double dust,
                                        RngStream& rng, double min_part = 0.0);

// Rejection sampler for the dislocation measure conditioned on
// {1 - s1 > eps_cut}: proposes the split level x from its sigma-finite
// mixture density restricted to x >= x_lo, draws the conditioned partition
// with total 1 and accepts when the largest part is small enough.  The
// sampler maintains a running estimate of the conditioned total rate
// lambda_eps, and x_lo is calibrated so that the bounded contribution of
// the discarded region {x < x_lo} stays below 1% of it.
class DislocationSampler {
public:
    DislocationSampler(const StableParams& p, double eps_cut, double dust);

    MassPartition draw(RngStream& rng, double min_part = 0.0);

    // fixed-rate estimate from a deterministic internal calibration run,
    // used for event clocks so rates do not drift with accumulated draws
    double calibrate_lambda(std::size_t n_trials);
    double lambda_frozen() const { return lambda_frozen_; }

    double lambda_est() const;
    double lambda_std_err() const;
    double proposal_mass() const { return proposal_mass_; }
    double x_lo() const { return x_lo_; }
    double truncation_bound() const { return trunc_bound_; }
    std::uint64_t trials() const { return trials_; }
    std::uint64_t accepts() const { return accepts_; }

private:
    double bound_below(double x_lo) const;
    void build_proposal();
    MassPartition draw_internal(RngStream& rng, double min_part, bool pilot);

    StableParams params_;
    double eps_cut_;
    double dust_;
    double x_lo_ = 0.0;
    double proposal_mass_ = 0.0; // nu-mass of the proposal region {x >= x_lo}
    double trunc_bound_ = 0.0;
    DensityTable vtable_; // proposal density of v = x^{-alpha}
    double lambda_frozen_ = 0.0;
    std::uint64_t trials_ = 0;
    std::uint64_t accepts_ = 0;
};

// Small-time limit law: Z stable(alpha-1) with transform
// exp(-alpha lambda^{alpha-1}), then the ranked jumps of the ladder-time
// subordinator over local-time horizon Z, truncated at a dust-controlled
// level with the small-jump mean carried in the remainder bucket.
MassPartition sample_small_time_limit(const StableParams& p, double dust,
                                      RngStream& rng);

} // namespace stfrag

#endif
