#ifndef STFRAG_FRAG_HPP
#define STFRAG_FRAG_HPP

#include "stfrag/mass_partition.hpp"
#include "stfrag/rng.hpp"
#include "stfrag/sampler.hpp"
#include "stfrag/stable_params.hpp"

#include <functional>
#include <vector>

namespace stfrag {

// One simulated fragmentation: ranked-mass states along a time grid.
struct FragmentationTrace {
    std::vector<double> t_grid;
    std::vector<MassPartition> states;
    nlohmann::json meta;
};

enum class PathFragMode { FirstPassage, Normalized };

struct PathFragOptions {
    PathFragMode mode = PathFragMode::Normalized;
    double eps = 1e-3;             // jump-field truncation
    double duration_window = 0.02; // accepted excursion durations in [1, 1+w]
    double segment_horizon = 4.0;  // harvesting segment length
    std::size_t max_segments = 20000;
    double init_horizon = 3.0;     // first-passage mode starting horizon
};

// Path-level fragmentation: simulate the marked jump field, remove marks at
// each level of the grid and rank the constancy intervals of the running
// infimum.
//
// First-passage mode works on [0, T_1] (total mass is random).  Normalized
// mode harvests an excursion above the infimum with duration inside the
// window, rescales it to duration 1 by the stable scaling (which maps the
// conditioned excursion law exactly), and works on [0, 1].  Mark clocks are
// kept with their jumps so the states are coupled across the grid.
FragmentationTrace frag_path_level(const StableParams& p, const std::vector<double>& t_grid,
                                   const PathFragOptions& opt, const RngStream& rng);

struct KernelFragOptions {
    double eps_cut = 0.01; // dislocations with 1 - s1 <= eps_cut are suppressed
    double floor = 1e-6;   // fragments below this are frozen, never split
    double dust = 1e-3;    // relative dust inside each dislocation draw
    double init_mass = 1.0;
    std::size_t max_events = 2000000;
    std::size_t lambda_calibration = 80000;
};

// Kernel-level self-similar fragmentation: every live fragment of mass x
// carries an exponential clock of rate x^{1/alpha} * lambda_eps; on firing
// it is replaced by x times a draw from the conditioned dislocation law.
// States (live + frozen fragments, dust in the remainder) are recorded at
// the requested times.
FragmentationTrace frag_kernel_level(const StableParams& p, const std::vector<double>& t_grid,
                                     const KernelFragOptions& opt, const RngStream& rng);

// Monte Carlo estimate of t^{-1} E[G(F(t))] from one-time marginals, for a
// functional G vanishing near (1,0,...); returns (estimate, std_err).
std::pair<double, double> splitting_rate_estimate(
    const StableParams& p, const std::function<double(const MassPartition&)>& test_fn,
    double t_small, std::size_t n_rep, const RngStream& rng, double dust = 1e-3);

} // namespace stfrag

#endif
