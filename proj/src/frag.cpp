#include "stfrag/frag.hpp"

#include "stfrag/errors.hpp"
#include "stfrag/path_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

namespace stfrag {

namespace {

MassPartition state_from_constancy(const std::vector<ConstancyInterval>& ivs, double upto) {
    MassPartition mp;
    mp.total = upto;
    double s = 0.0;
    for (const auto& iv : ivs) {
        const double len = iv.hi - iv.lo;
        if (len > 1e-15) {
            mp.parts.push_back(len);
            s += len;
        }
    }
    mp.remainder = std::max(0.0, upto - s);
    mp.rank_and_check();
    return mp;
}

// completed excursion intervals of the path above its running infimum
struct Excursion {
    double lo, hi;
};

std::vector<Excursion> completed_excursions(const JumpLedger& led) {
    std::vector<Excursion> out;
    for (const auto& iv : infimum_constancy(led, led.horizon))
        if (iv.hi < led.horizon * (1.0 - 1e-12)) out.push_back({iv.lo, iv.hi});
    return out;
}

JumpLedger extract_rescaled_excursion(const JumpLedger& led, double lo, double hi,
                                      double alpha) {
    const double dur = hi - lo;
    const double gamma = 1.0 / dur;
    const double mag_scale = std::pow(gamma, 1.0 / alpha);
    JumpLedger exc;
    exc.horizon = 1.0;
    exc.drift_rate = led.drift_rate * std::pow(gamma, 1.0 / alpha - 1.0);
    for (const auto& e : led.entries) {
        if (e.time < lo || e.time > hi) continue;
        JumpEntry ne;
        ne.time = std::min(1.0, (e.time - lo) * gamma);
        ne.mag = e.mag * mag_scale;
        ne.clock = e.clock; // kept: marking at level t now reads the scaled jump
        exc.entries.push_back(ne);
    }
    exc.finalize();
    return exc;
}

} // namespace

FragmentationTrace frag_path_level(const StableParams& p, const std::vector<double>& t_grid,
                                   const PathFragOptions& opt, const RngStream& rng) {
    if (t_grid.empty()) throw domain_error("frag_path_level: empty time grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw domain_error("frag_path_level: time grid must be increasing");

    FragmentationTrace tr;
    tr.t_grid = t_grid;
    tr.meta = {{"alpha", p.alpha},
               {"eps", opt.eps},
               {"mode", opt.mode == PathFragMode::Normalized ? "normalized" : "first_passage"},
               {"seed", rng.seed()},
               {"stream_id", rng.stream_id()}};

    if (opt.mode == PathFragMode::FirstPassage) {
        double horizon = opt.init_horizon;
        for (std::uint64_t attempt = 0;; ++attempt) {
            JumpLedger field = sample_jump_field(p, horizon, opt.eps, rng.substream(attempt));
            try {
                const double t1 = first_passage(field, -1.0);
                for (double t : t_grid) {
                    const JumpLedger thinned = (t > 0.0) ? remove_marked(field, t) : field;
                    tr.states.push_back(
                        state_from_constancy(infimum_constancy(thinned, t1), t1));
                }
                return tr;
            } catch (const not_reached_error&) {
                horizon *= 2.0;
                if (attempt > 40)
                    throw resource_error("frag_path_level: passage horizon budget exhausted");
            }
        }
    }

    // normalized mode: harvest a window excursion, rescale to duration 1
    const double w_hi = 1.0 + opt.duration_window;
    for (std::size_t seg = 0; seg < opt.max_segments; ++seg) {
        JumpLedger field =
            sample_jump_field(p, opt.segment_horizon, opt.eps, rng.substream(seg));
        for (const auto& exc : completed_excursions(field)) {
            const double dur = exc.hi - exc.lo;
            if (dur < 1.0 || dur > w_hi) continue;
            JumpLedger led = extract_rescaled_excursion(field, exc.lo, exc.hi, p.alpha);
            for (double t : t_grid) {
                if (t <= 0.0) {
                    MassPartition mp;
                    mp.total = 1.0;
                    mp.parts = {1.0};
                    mp.rank_and_check();
                    tr.states.push_back(std::move(mp));
                    continue;
                }
                const JumpLedger thinned = remove_marked(led, t);
                tr.states.push_back(
                    state_from_constancy(infimum_constancy(thinned, 1.0), 1.0));
            }
            tr.meta["harvest_segments"] = seg + 1;
            tr.meta["duration"] = dur;
            return tr;
        }
    }
    throw resource_error("frag_path_level: excursion harvest budget exhausted");
}

namespace {

std::shared_ptr<DislocationSampler> kernel_dislocation(const StableParams& p,
                                                       double eps_cut, double dust,
                                                       std::size_t calibration) {
    static std::map<std::tuple<long long, long long, long long>,
                    std::shared_ptr<DislocationSampler>>
        cache;
    static std::mutex mu;
    auto bits = [](double v) {
        long long r;
        std::memcpy(&r, &v, sizeof(r));
        return r;
    };
    const auto key = std::make_tuple(bits(p.alpha), bits(eps_cut), bits(dust));
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto ds = std::make_shared<DislocationSampler>(p, eps_cut, dust);
        ds->calibrate_lambda(calibration);
        it = cache.emplace(key, std::move(ds)).first;
    }
    return it->second;
}

} // namespace

FragmentationTrace frag_kernel_level(const StableParams& p, const std::vector<double>& t_grid,
                                     const KernelFragOptions& opt, const RngStream& rng) {
    if (t_grid.empty()) throw domain_error("frag_kernel_level: empty time grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw domain_error("frag_kernel_level: time grid must be increasing");
    if (!(opt.eps_cut > 0.0 && opt.floor > 0.0))
        throw domain_error("frag_kernel_level: eps_cut and floor must be positive");

    auto disl = kernel_dislocation(p, opt.eps_cut, opt.dust, opt.lambda_calibration);
    const double lambda = disl->lambda_frozen();
    const double beta = 1.0 / p.alpha;

    struct Event {
        double when;
        std::uint64_t frag;
        bool operator>(const Event& o) const { return when > o.when; }
    };
    std::vector<double> mass;      // all fragments, frozen included
    double frozen_dust = 0.0;      // lumped sub-floor masses
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
    RngStream local = rng.substream(0xF60C);

    mass.push_back(opt.init_mass);
    if (opt.init_mass >= opt.floor)
        events.push({local.exponential() / (std::pow(opt.init_mass, beta) * lambda), 0});

    FragmentationTrace tr;
    tr.t_grid = t_grid;
    tr.meta = {{"alpha", p.alpha}, {"eps_cut", opt.eps_cut},   {"floor", opt.floor},
               {"dust", opt.dust}, {"lambda_eps", lambda},      {"seed", rng.seed()},
               {"stream_id", rng.stream_id()}};

    auto snapshot = [&](double upto_total) {
        MassPartition mp;
        mp.total = upto_total;
        mp.parts = mass;
        mp.remainder = frozen_dust;
        mp.rank_and_check();
        tr.states.push_back(std::move(mp));
    };

    std::size_t next_record = 0;
    std::size_t n_events = 0;
    double now = 0.0;
    while (next_record < t_grid.size()) {
        const bool have = !events.empty();
        const double t_next = have ? events.top().when : 1e300;
        while (next_record < t_grid.size() && t_grid[next_record] < t_next) {
            snapshot(opt.init_mass);
            ++next_record;
        }
        if (next_record >= t_grid.size()) break;
        if (!have) break;
        const Event ev = events.top();
        events.pop();
        now = ev.when;
        if (++n_events > opt.max_events)
            throw resource_error("frag_kernel_level: event budget exceeded");

        const double x = mass[ev.frag];
        MassPartition split = disl->draw(local, opt.floor / (3.0 * x));
        // replace the fragment by its children
        bool reused = false;
        frozen_dust += split.remainder * x;
        for (double part : split.parts) {
            const double child = part * x;
            std::uint64_t idx;
            if (!reused) {
                mass[ev.frag] = child;
                idx = ev.frag;
                reused = true;
            } else {
                mass.push_back(child);
                idx = mass.size() - 1;
            }
            if (child >= opt.floor)
                events.push(
                    {now + local.exponential() / (std::pow(child, beta) * lambda), idx});
        }
        if (!reused) mass[ev.frag] = 0.0; // everything went to dust
    }
    while (next_record < t_grid.size()) {
        snapshot(opt.init_mass);
        ++next_record;
    }
    return tr;
}

std::pair<double, double> splitting_rate_estimate(
    const StableParams& p, const std::function<double(const MassPartition&)>& test_fn,
    double t_small, std::size_t n_rep, const RngStream& rng, double dust) {
    if (!(t_small > 0.0)) throw domain_error("splitting_rate_estimate: t must be positive");
    if (n_rep < 2) throw domain_error("splitting_rate_estimate: need n_rep >= 2");
    double acc = 0.0, acc2 = 0.0;
    RngStream local = rng.substream(0x57A7);
    for (std::size_t i = 0; i < n_rep; ++i) {
        const MassPartition mp = sample_semigroup_marginal(p, t_small, dust, local);
        const double g = test_fn(mp);
        acc += g;
        acc2 += g * g;
    }
    const double mean = acc / static_cast<double>(n_rep);
    const double var = std::max(0.0, acc2 / static_cast<double>(n_rep) - mean * mean);
    return {mean / t_small,
            std::sqrt(var / static_cast<double>(n_rep)) / t_small};
}

} // namespace stfrag
