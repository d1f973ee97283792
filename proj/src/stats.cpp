#include "stfrag/stats.hpp"

#include "stfrag/errors.hpp"
#include "stfrag/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace stfrag {

nlohmann::json TestReport::to_json() const {
    return nlohmann::json{{"name", name},   {"statistic", statistic},
                          {"p_value", p_value}, {"n", n},
                          {"pass", pass},   {"details", details}};
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) *
                            std::exp(-2.0 * k * k * lambda * lambda);
        q += term;
        if (std::abs(term) < 1e-14) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

TestReport ks_test(std::vector<double> sample, const std::function<double(double)>& cdf,
                   double level, const std::string& name) {
    if (sample.size() < 20) throw domain_error("ks_test: need n >= 20");
    std::sort(sample.begin(), sample.end());
    if (sample.front() == sample.back())
        throw degenerate_input_error("ks_test: degenerate sample (all equal)");
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    const double sq = std::sqrt(n);
    const double lambda = d * (sq + 0.12 + 0.11 / sq);
    TestReport r;
    r.name = name;
    r.statistic = d;
    r.p_value = kolmogorov_q(lambda);
    r.n = sample.size();
    r.pass = r.p_value > level;
    r.details = {{"level", level}, {"kind", "one-sample"}};
    return r;
}

TestReport ks_test(std::vector<double> a, std::vector<double> b, double level,
                   const std::string& name) {
    if (a.size() < 20 || b.size() < 20) throw domain_error("ks_test: need n >= 20");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.front() == a.back() || b.front() == b.back())
        throw degenerate_input_error("ks_test: degenerate sample (all equal)");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = d * (ne + 0.12 + 0.11 / ne);
    TestReport r;
    r.name = name;
    r.statistic = d;
    r.p_value = kolmogorov_q(lambda);
    r.n = a.size() + b.size();
    r.pass = r.p_value > level;
    r.details = {{"level", level}, {"kind", "two-sample"}};
    return r;
}

std::vector<MomentEstimate> rho_measure_moments(const std::vector<FragmentationTrace>& reps,
                                                double t, const std::vector<double>& powers,
                                                double alpha) {
    if (reps.empty()) throw domain_error("rho_measure_moments: no replicates");
    std::vector<MomentEstimate> out;
    const double ta = std::pow(t, alpha);
    for (double r : powers) {
        double acc = 0.0, acc2 = 0.0;
        std::size_t n = 0;
        for (const auto& tr : reps) {
            // locate t in the trace grid
            std::size_t k = 0;
            bool found = false;
            for (; k < tr.t_grid.size(); ++k)
                if (std::abs(tr.t_grid[k] - t) <= 1e-12 * std::max(1.0, t)) {
                    found = true;
                    break;
                }
            if (!found) throw domain_error("rho_measure_moments: t not in trace grid");
            const MassPartition& mp = tr.states[k];
            double v = (r == 0.0) ? mp.remainder : 0.0; // dust atoms count at r = 0
            for (double f : mp.parts) v += f * std::pow(ta * f, r);
            acc += v;
            acc2 += v * v;
            ++n;
        }
        const double mean = acc / static_cast<double>(n);
        const double var = std::max(0.0, acc2 / static_cast<double>(n) - mean * mean);
        out.push_back({r, mean, n > 1 ? std::sqrt(var / static_cast<double>(n)) : 0.0});
    }
    return out;
}

std::vector<TestReport> small_time_report(const StableParams& p,
                                          const std::vector<double>& t_list,
                                          std::size_t n_rep, const RngStream& rng,
                                          double level) {
    std::vector<TestReport> out;
    const double a = p.alpha;
    for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
        const double t = t_list[ti];
        if (!(t > 0.0)) throw domain_error("small_time_report: t must be positive");
        const double rescale = std::pow(t, a / (1.0 - a)); // multiplies F_2
        const double zscale = std::pow(t, 1.0 / (1.0 - a));
        RngStream local = rng.substream(0x57E11, ti);

        std::vector<double> f2_scaled, z_scaled, limit_largest, limit_z;
        f2_scaled.reserve(n_rep);
        const double dust = std::pow(t, a / (a - 1.0)) * 1e-3; // resolves F2
        for (std::size_t i = 0; i < n_rep; ++i) {
            const double z = sample_semigroup_z(p, t, local);
            z_scaled.push_back(zscale * z);
            MassPartition mp =
                sample_conditioned_partition(p, z, 1.0, dust, local,
                                             std::pow(t, a / (a - 1.0)) * 1e-2);
            f2_scaled.push_back(rescale * mp.largest(1));
            limit_largest.push_back(sample_small_time_limit(p, 1e-2, local).largest(0));
            limit_z.push_back(sample_one_sided_stable(a - 1.0, a, local));
        }
        TestReport r1 = ks_test(f2_scaled, limit_largest, level,
                                "small_time_F2[t=" + std::to_string(t) + "]");
        r1.details["t"] = t;
        out.push_back(std::move(r1));
        TestReport r2 = ks_test(z_scaled, limit_z, level,
                                "small_time_Z[t=" + std::to_string(t) + "]");
        r2.details["t"] = t;
        out.push_back(std::move(r2));
    }
    return out;
}

} // namespace stfrag
