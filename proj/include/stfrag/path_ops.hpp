#ifndef STFRAG_PATH_OPS_HPP
#define STFRAG_PATH_OPS_HPP

#include "stfrag/mass_partition.hpp"

#include <json.hpp>

#include <cstddef>
#include <vector>

namespace stfrag {

// One upward jump of a truncated Levy-Ito path, carrying its exponential
// mark clock: the jump is marked at level t whenever clock < t * mag.
struct JumpEntry {
    double time;
    double mag;
    double clock;
};

// Truncated Levy path: compensator drift plus finitely many jumps.  Between
// jumps the path is exactly linear, so passage and return times are closed
// form on segments.  Entries are strictly time-sorted; ties are impossible
// for generated paths (continuous time draws) and rejected here.
struct JumpLedger {
    std::vector<JumpEntry> entries;
    double horizon = 0.0;
    double drift_rate = 0.0; // <= 0 for process approximations, 0 for subordinators

    // sort entries, verify invariants, build the prefix sums
    void finalize();

    // cadlag value drift*s + sum of jumps with time <= s
    double value(double s) const;
    // sum of jump magnitudes with time <= s
    double jump_mass_up_to(double s) const;
    double total_jump_mass() const;

    nlohmann::json to_json() const;
    static JumpLedger from_json(const nlohmann::json& j);

    const std::vector<double>& prefix() const { return prefix_; }

private:
    std::vector<double> prefix_; // prefix_[i] = sum of first i magnitudes
};

struct Interval {
    double lo;
    double hi;
    long owner_jump; // index into the source ledger, -1 when not applicable
};

// Marked return intervals with their nesting structure.  Intervals are
// pairwise disjoint or strictly nested; parent[i] is the tightest enclosing
// interval or -1.
struct IntervalForest {
    std::vector<Interval> intervals;
    std::vector<long> parent;
    const JumpLedger* source = nullptr;
    double level = -1.0; // marking level t the forest was built at

    bool is_root(std::size_t i) const { return parent[i] < 0; }
};

struct ConstancyInterval {
    double lo;
    double hi;
    double level;
};

// cadlag evaluation; s outside [0, horizon] is a domain error
double evaluate(const JumpLedger& path, double s);

// Constancy intervals of the running infimum on [0, upto] (the infimum is
// taken against the starting level 0).  Their complement is the set where
// the infimum strictly decreases; together they tile [0, upto].
// Requires drift_rate < 0.
std::vector<ConstancyInterval> infimum_constancy(const JumpLedger& path, double upto);

// Exact first time the path goes strictly below `level` (< 0); throws
// not_reached_error carrying the terminal infimum if the horizon ends first.
double first_passage(const JumpLedger& path, double level);

// Ledger with every jump satisfying clock < t*mag deleted; drift unchanged.
JumpLedger remove_marked(const JumpLedger& path, double t);

// For each marked jump at tau with time <= upto, the interval [tau, sigma]
// with sigma the first return to the pre-jump level (clipped at upto),
// plus the nesting relation.
IntervalForest marked_interval_forest(const JumpLedger& path, double t, double upto);

// Masses of the root component and of every sub-excursion component of each
// marked interval, ranked; bottom-slide time of the truncated model goes to
// the remainder bucket, so parts + remainder == upto exactly.
MassPartition component_masses(const IntervalForest& forest, const JumpLedger& path,
                               double upto);

// Rotation of a bridge-like path at the time of its minimum.  The result
// starts at 0, stays >= -1e-9 and ends at 0.
JumpLedger vervaat(const JumpLedger& path);

// Excise a family of non-overlapping-or-nested closed intervals: the
// maximal sub-family must be separated (positive gaps) and each maximal
// interval must return to its opening level, i.e. value(hi) == value(lo-),
// so the glued path has no seam.  Jumps at excised left endpoints vanish
// with their interval.
JumpLedger unplug(const JumpLedger& path, const std::vector<Interval>& intervals);

// Supremum over a dense grid of the gap between the running infimum of the
// level-t path and the Skorokhod reconstruction of it from level t+t'.
double skorokhod_residual(const JumpLedger& path, double t, double t_prime, double upto);

} // namespace stfrag

#endif
