#ifndef STFRAG_STATS_HPP
#define STFRAG_STATS_HPP

#include "stfrag/frag.hpp"
#include "stfrag/rng.hpp"
#include "stfrag/stable_params.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace stfrag {

struct TestReport {
    std::string name;
    double statistic = 0.0;
    double p_value = 0.0;
    std::size_t n = 0;
    bool pass = false;
    nlohmann::json details = nlohmann::json::object();

    nlohmann::json to_json() const;
};

// upper tail of the Kolmogorov distribution
double kolmogorov_q(double lambda);

// One-sample Kolmogorov-Smirnov against an evaluable CDF; asymptotic
// p-value with the Stephens small-sample correction.  Requires n >= 20.
TestReport ks_test(std::vector<double> sample, const std::function<double(double)>& cdf,
                   double level = 0.01, const std::string& name = "ks");

// Two-sample form.
TestReport ks_test(std::vector<double> a, std::vector<double> b, double level = 0.01,
                   const std::string& name = "ks2");

// Monte Carlo moments of the rescaled empirical measure
// rho_t = sum_i F_i delta_{t^alpha F_i}: for each power r the estimate of
// sum_i F_i (t^alpha F_i)^r averaged over replicate traces, with its
// standard error.
struct MomentEstimate {
    double power;
    double estimate;
    double std_err;
};
std::vector<MomentEstimate> rho_measure_moments(const std::vector<FragmentationTrace>& reps,
                                                double t, const std::vector<double>& powers,
                                                double alpha);

// Small-time diagnostics at each t: a two-sample KS of the rescaled
// second-largest fragment t^{alpha/(1-alpha)} F_2(t) against the largest
// element of the limit partition, and a two-sample KS of the rescaled split
// variable t^{1/(1-alpha)} z against the stable(alpha-1) limit law.
std::vector<TestReport> small_time_report(const StableParams& p,
                                          const std::vector<double>& t_list,
                                          std::size_t n_rep, const RngStream& rng,
                                          double level = 0.01);

} // namespace stfrag

#endif
