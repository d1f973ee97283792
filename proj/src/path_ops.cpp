#include "stfrag/path_ops.hpp"

#include "stfrag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stfrag {

void MassPartition::rank_and_check() {
    std::sort(parts.begin(), parts.end(), std::greater<double>());
    while (!parts.empty() && parts.back() <= 0.0) parts.pop_back();
    if (remainder < 0.0) {
        if (remainder < -1e-9) throw contract_error("MassPartition: negative remainder");
        remainder = 0.0;
    }
    double s = remainder;
    for (double p : parts) s += p;
    if (std::abs(s - total) > 1e-9 * std::max(1.0, std::abs(total)))
        throw contract_error("MassPartition: parts + remainder != total");
}

double MassPartition::largest(std::size_t k) const {
    return k < parts.size() ? parts[k] : 0.0;
}

double MassPartition::sum_parts() const {
    double s = 0.0;
    for (double p : parts) s += p;
    return s;
}

nlohmann::json MassPartition::to_json(double t, std::uint64_t stream_id) const {
    return nlohmann::json{{"t", t},
                          {"parts", parts},
                          {"remainder", remainder},
                          {"total", total},
                          {"stream_id", stream_id}};
}

void JumpLedger::finalize() {
    if (!(horizon > 0.0)) throw contract_error("JumpLedger: horizon must be positive");
    std::stable_sort(entries.begin(), entries.end(),
                     [](const JumpEntry& a, const JumpEntry& b) { return a.time < b.time; });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& e = entries[i];
        if (!(e.mag > 0.0)) throw contract_error("JumpLedger: nonpositive magnitude");
        if (!(e.time >= 0.0) || !(e.time <= horizon))
            throw contract_error("JumpLedger: time outside [0, horizon]");
        // exact time ties are a measure-zero accident of generation; nudge
        if (i > 0 && e.time <= entries[i - 1].time)
            e.time = std::nextafter(entries[i - 1].time,
                                    std::numeric_limits<double>::infinity());
    }
    prefix_.assign(entries.size() + 1, 0.0);
    for (std::size_t i = 0; i < entries.size(); ++i)
        prefix_[i + 1] = prefix_[i] + entries[i].mag;
}

double JumpLedger::jump_mass_up_to(double s) const {
    const auto it = std::upper_bound(
        entries.begin(), entries.end(), s,
        [](double v, const JumpEntry& e) { return v < e.time; });
    return prefix_[static_cast<std::size_t>(it - entries.begin())];
}

double JumpLedger::total_jump_mass() const { return prefix_.empty() ? 0.0 : prefix_.back(); }

double JumpLedger::value(double s) const { return drift_rate * s + jump_mass_up_to(s); }

nlohmann::json JumpLedger::to_json() const {
    nlohmann::json es = nlohmann::json::array();
    for (const auto& e : entries)
        es.push_back({{"t", e.time}, {"mag", e.mag}, {"clock", e.clock}});
    return nlohmann::json{
        {"horizon", horizon}, {"drift_rate", drift_rate}, {"entries", es}};
}

JumpLedger JumpLedger::from_json(const nlohmann::json& j) {
    JumpLedger l;
    l.horizon = j.at("horizon").get<double>();
    l.drift_rate = j.at("drift_rate").get<double>();
    for (const auto& e : j.at("entries"))
        l.entries.push_back({e.at("t").get<double>(), e.at("mag").get<double>(),
                             e.at("clock").get<double>()});
    l.finalize();
    return l;
}

double evaluate(const JumpLedger& path, double s) {
    if (!(s >= 0.0) || !(s <= path.horizon))
        throw domain_error("evaluate: s outside [0, horizon]");
    return path.value(s);
}

namespace {

struct InfWalk {
    std::vector<ConstancyInterval> intervals;
    double slide = 0.0;
};

// Running-infimum decomposition of the shifted path started at `from_time`
// with value baseline 0, over (from_time, to_time].  The infimum is taken
// against the starting level, so an initial jump opens an excursion at once.
InfWalk walk_infimum(const JumpLedger& path, double from_time, double to_time) {
    const double d = path.drift_rate;
    if (!(d < 0.0))
        throw domain_error("infimum walk requires a negative compensator drift");
    InfWalk out;
    double t_cur = from_time, v = 0.0;
    bool at_bottom = true;
    double open_t = 0.0, open_level = 0.0;

    auto it = std::upper_bound(
        path.entries.begin(), path.entries.end(), from_time,
        [](double val, const JumpEntry& e) { return val < e.time; });
    for (; it != path.entries.end() && it->time <= to_time; ++it) {
        const double tj = it->time;
        if (at_bottom) {
            out.slide += tj - t_cur;
            v += d * (tj - t_cur);
            open_t = tj;
            open_level = v;
            v += it->mag;
            at_bottom = false;
        } else {
            const double t_hit = t_cur + (v - open_level) / (-d);
            if (t_hit <= tj) {
                out.intervals.push_back({open_t, t_hit, open_level});
                out.slide += tj - t_hit;
                v = open_level + d * (tj - t_hit);
                open_t = tj;
                open_level = v;
                v += it->mag;
            } else {
                v += d * (tj - t_cur) + it->mag;
            }
        }
        t_cur = tj;
    }
    if (at_bottom) {
        out.slide += to_time - t_cur;
    } else {
        const double t_hit = t_cur + (v - open_level) / (-d);
        if (t_hit <= to_time) {
            out.intervals.push_back({open_t, t_hit, open_level});
            out.slide += to_time - t_hit;
        } else {
            out.intervals.push_back({open_t, to_time, open_level}); // clipped
        }
    }
    return out;
}

} // namespace

std::vector<ConstancyInterval> infimum_constancy(const JumpLedger& path, double upto) {
    if (!(upto > 0.0) || upto > path.horizon)
        throw domain_error("infimum_constancy: upto outside (0, horizon]");
    return walk_infimum(path, 0.0, upto).intervals;
}

double first_passage(const JumpLedger& path, double level) {
    if (!(path.drift_rate < 0.0))
        throw domain_error("first_passage requires a negative compensator drift");
    if (!(level < 0.0)) throw domain_error("first_passage: level must be negative");
    const double d = path.drift_rate;
    double t_cur = 0.0, v = 0.0, inf = 0.0;
    for (const auto& e : path.entries) {
        const double seg = e.time - t_cur;
        if (v > level && v + d * seg <= level) return t_cur + (v - level) / (-d);
        v += d * seg;
        inf = std::min(inf, v);
        v += e.mag;
        t_cur = e.time;
    }
    const double seg = path.horizon - t_cur;
    if (v > level && v + d * seg <= level) return t_cur + (v - level) / (-d);
    inf = std::min(inf, v + d * seg);
    throw not_reached_error("first_passage: level not reached before horizon", inf);
}

JumpLedger remove_marked(const JumpLedger& path, double t) {
    if (!(t >= 0.0)) throw domain_error("remove_marked: t must be nonnegative");
    JumpLedger out;
    out.horizon = path.horizon;
    out.drift_rate = path.drift_rate;
    out.entries.reserve(path.entries.size());
    for (const auto& e : path.entries)
        if (!(e.clock < t * e.mag)) out.entries.push_back(e);
    out.finalize();
    return out;
}

IntervalForest marked_interval_forest(const JumpLedger& path, double t, double upto) {
    if (!(path.drift_rate < 0.0))
        throw domain_error("marked_interval_forest requires negative drift");
    if (!(t > 0.0)) throw domain_error("marked_interval_forest: t must be positive");
    if (!(upto > 0.0) || upto > path.horizon)
        throw domain_error("marked_interval_forest: upto outside (0, horizon]");
    const double d = path.drift_rate;

    IntervalForest forest;
    forest.source = &path;
    forest.level = t;
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
        const auto& e = path.entries[i];
        if (e.time >= upto) break;
        if (!(e.clock < t * e.mag)) continue;
        const double level = d * e.time + path.prefix()[i]; // value just before the jump
        double w = level + e.mag;
        double t_prev = e.time;
        double sigma = upto;
        for (std::size_t k = i + 1; k <= path.entries.size(); ++k) {
            const double tk =
                (k < path.entries.size()) ? std::min(path.entries[k].time, upto) : upto;
            const double t_hit = t_prev + (w - level) / (-d);
            if (t_hit <= tk) {
                sigma = t_hit;
                break;
            }
            if (tk >= upto) break; // clipped at upto
            w += d * (tk - t_prev) + path.entries[k].mag;
            t_prev = tk;
        }
        forest.intervals.push_back({e.time, sigma, static_cast<long>(i)});
    }

    // nesting: intervals arrive sorted by left end; disjoint or nested a.s.
    forest.parent.assign(forest.intervals.size(), -1);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < forest.intervals.size(); ++i) {
        while (!stack.empty() &&
               forest.intervals[stack.back()].hi <= forest.intervals[i].lo)
            stack.pop_back();
        if (!stack.empty()) {
            if (forest.intervals[i].hi > forest.intervals[stack.back()].hi + 1e-9)
                throw geometry_error("marked intervals overlap without nesting");
            forest.parent[i] = static_cast<long>(stack.back());
        }
        stack.push_back(i);
    }
    return forest;
}

MassPartition component_masses(const IntervalForest& forest, const JumpLedger& path,
                               double upto) {
    if (forest.source != &path)
        throw contract_error("component_masses: forest was built from a different path");
    if (!(upto > 0.0) || upto > path.horizon)
        throw domain_error("component_masses: upto outside (0, horizon]");

    MassPartition mp;
    mp.total = upto;

    double maximal_len = 0.0;
    for (std::size_t i = 0; i < forest.intervals.size(); ++i)
        if (forest.is_root(i))
            maximal_len += std::min(forest.intervals[i].hi, upto) - forest.intervals[i].lo;
    const double root_mass = upto - maximal_len;
    if (root_mass > 1e-15) mp.parts.push_back(root_mass);

    std::vector<std::vector<std::size_t>> children(forest.intervals.size());
    for (std::size_t i = 0; i < forest.intervals.size(); ++i)
        if (!forest.is_root(i))
            children[static_cast<std::size_t>(forest.parent[i])].push_back(i);

    for (std::size_t i = 0; i < forest.intervals.size(); ++i) {
        const auto& node = forest.intervals[i];
        const double hi = std::min(node.hi, upto);
        const InfWalk walk = walk_infimum(path, node.lo, hi);
        mp.remainder += walk.slide;
        std::vector<double> sub_mass(walk.intervals.size());
        for (std::size_t j = 0; j < walk.intervals.size(); ++j)
            sub_mass[j] = walk.intervals[j].hi - walk.intervals[j].lo;
        for (std::size_t c : children[i]) {
            const auto& kid = forest.intervals[c];
            // locate the sub-excursion holding this child
            std::size_t j = 0;
            bool found = false;
            for (; j < walk.intervals.size(); ++j) {
                if (kid.lo >= walk.intervals[j].lo - 1e-12 &&
                    kid.lo < walk.intervals[j].hi + 1e-12) {
                    found = true;
                    break;
                }
            }
            if (!found)
                throw contract_error("component_masses: child outside sub-excursions");
            sub_mass[j] -= std::min(kid.hi, upto) - kid.lo;
        }
        for (double m : sub_mass)
            if (m > 1e-15) mp.parts.push_back(m);
            else mp.remainder += std::max(m, 0.0);
    }
    mp.rank_and_check();
    return mp;
}

JumpLedger vervaat(const JumpLedger& path) {
    const double v_end = path.value(path.horizon);
    if (std::abs(v_end) > 1e-9)
        throw domain_error("vervaat: path endpoint not at 0 (not bridge-like)");
    // minima sit just before jumps or at the endpoints
    double best = 0.0;
    std::size_t best_idx = path.entries.size() + 1; // sentinel: minimum at time 0
    double second = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
        const double pre = path.drift_rate * path.entries[i].time + path.prefix()[i];
        if (pre < best) {
            second = best;
            best = pre;
            best_idx = i;
        } else {
            second = std::min(second, pre);
        }
    }
    if (best_idx <= path.entries.size() && second - best < 1e-12)
        throw degenerate_input_error("vervaat: minimum not unique within tolerance");
    if (best_idx > path.entries.size()) return path; // minimum at the start

    const double tau = path.entries[best_idx].time;
    JumpLedger out;
    out.horizon = path.horizon;
    out.drift_rate = path.drift_rate;
    out.entries.reserve(path.entries.size());
    for (std::size_t i = best_idx; i < path.entries.size(); ++i) {
        JumpEntry e = path.entries[i];
        e.time -= tau;
        out.entries.push_back(e);
    }
    for (std::size_t i = 0; i < best_idx; ++i) {
        JumpEntry e = path.entries[i];
        e.time += path.horizon - tau;
        out.entries.push_back(e);
    }
    out.finalize();
    return out;
}

JumpLedger unplug(const JumpLedger& path, const std::vector<Interval>& intervals) {
    if (intervals.empty()) {
        JumpLedger copy = path;
        copy.finalize();
        return copy;
    }
    std::vector<Interval> sorted = intervals;
    std::sort(sorted.begin(), sorted.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const auto& iv : sorted)
        if (!(iv.lo >= 0.0) || !(iv.lo < iv.hi) || iv.hi > path.horizon + 1e-12)
            throw geometry_error("unplug: interval outside [0, horizon] or empty");

    // maximal sub-family; reject partial overlap
    std::vector<Interval> maximal;
    for (const auto& iv : sorted) {
        if (!maximal.empty() && iv.lo < maximal.back().hi) {
            if (iv.hi > maximal.back().hi + 1e-9)
                throw geometry_error("unplug: intervals overlap without nesting");
            continue; // nested: ignored
        }
        maximal.push_back(iv);
    }
    for (std::size_t i = 1; i < maximal.size(); ++i)
        if (!(maximal[i].lo > maximal[i - 1].hi))
            throw geometry_error("unplug: maximal intervals are not separated");

    // each maximal interval must close at its opening level so the glued
    // path has no seam
    for (const auto& iv : maximal) {
        const double before = path.drift_rate * iv.lo + path.jump_mass_up_to(
                                  std::nextafter(iv.lo, -1.0));
        const double at_end = path.value(std::min(iv.hi, path.horizon));
        if (std::abs(at_end - before) > 1e-9 * std::max(1.0, std::abs(before)))
            throw geometry_error("unplug: interval does not return to its opening level");
    }

    JumpLedger out;
    out.drift_rate = path.drift_rate;
    double excised = 0.0;
    for (const auto& iv : maximal) excised += iv.hi - iv.lo;
    out.horizon = path.horizon - excised;

    for (const auto& e : path.entries) {
        double shift = 0.0;
        bool dropped = false;
        for (const auto& iv : maximal) {
            if (e.time >= iv.lo && e.time < iv.hi) {
                dropped = true;
                break;
            }
            if (iv.hi <= e.time) shift += iv.hi - iv.lo;
        }
        if (dropped) continue;
        JumpEntry ne = e;
        ne.time -= shift;
        out.entries.push_back(ne);
    }
    out.finalize();
    return out;
}

double skorokhod_residual(const JumpLedger& path, double t, double t_prime, double upto) {
    if (!(t >= 0.0) || !(t_prime > 0.0))
        throw domain_error("skorokhod_residual: need t >= 0, t' > 0");
    if (!(upto > 0.0) || upto > path.horizon)
        throw domain_error("skorokhod_residual: upto outside (0, horizon]");
    const JumpLedger low = remove_marked(path, t);
    const JumpLedger high = remove_marked(path, t + t_prime);

    // step function of jumps marked between levels t and t+t'
    std::vector<std::pair<double, double>> djump;
    for (const auto& e : path.entries)
        if (e.time <= upto && e.clock < (t + t_prime) * e.mag && !(e.clock < t * e.mag))
            djump.emplace_back(e.time, e.mag);

    std::vector<double> grid;
    for (const auto& e : path.entries)
        if (e.time <= upto) grid.push_back(e.time);
    for (int i = 0; i <= 1000; ++i) grid.push_back(upto * i / 1000.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    // running infimum of `low` sampled on the grid
    std::vector<double> lhs(grid.size());
    {
        const double d = low.drift_rate;
        double t_cur = 0.0, v = 0.0, m = 0.0;
        std::size_t k = 0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            while (k < low.entries.size() && low.entries[k].time <= grid[g]) {
                const double seg = low.entries[k].time - t_cur;
                m = std::min(m, v + d * seg);
                v += d * seg + low.entries[k].mag;
                t_cur = low.entries[k].time;
                ++k;
            }
            lhs[g] = std::min(m, v + d * (grid[g] - t_cur));
        }
    }

    // running min of (inf(high) + D) via a combined sweep
    std::vector<double> rhs(grid.size());
    {
        const double d = high.drift_rate;
        double t_cur = 0.0, v = 0.0, m = 0.0, dsum = 0.0, best = 0.0;
        std::size_t k = 0, q = 0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double s = grid[g];
            while (k < high.entries.size() && high.entries[k].time <= s) {
                const double te = high.entries[k].time;
                // D can step within (t_cur, te]; the infimum of high is
                // continuous so evaluating at step times suffices
                while (q < djump.size() && djump[q].first <= te) {
                    const double td = djump[q].first;
                    const double m_at = std::min(m, v + d * (td - t_cur));
                    best = std::min(best, m_at + dsum);
                    dsum += djump[q].second;
                    best = std::min(best, m_at + dsum);
                    ++q;
                }
                const double seg = te - t_cur;
                m = std::min(m, v + d * seg);
                v += d * seg + high.entries[k].mag;
                t_cur = te;
                best = std::min(best, m + dsum);
                ++k;
            }
            while (q < djump.size() && djump[q].first <= s) {
                const double td = djump[q].first;
                const double m_at = std::min(m, v + d * (td - t_cur));
                best = std::min(best, m_at + dsum);
                dsum += djump[q].second;
                best = std::min(best, m_at + dsum);
                ++q;
            }
            const double m_s = std::min(m, v + d * (s - t_cur));
            rhs[g] = std::min(best, m_s + dsum);
        }
    }

    double res = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g)
        res = std::max(res, std::abs(lhs[g] - rhs[g]));
    return res;
}

} // namespace stfrag
