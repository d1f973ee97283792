#ifndef STFRAG_STABLE_DENSITY_HPP
#define STFRAG_STABLE_DENSITY_HPP

#include "stfrag/numerics.hpp"
#include "stfrag/stable_params.hpp"

#include <memory>

namespace stfrag {

// Density machinery for the standard one-sided stable law with index
// beta in (0,1) and Laplace transform exp(-lambda^beta).
//
// The primary evaluator is the trigonometric integral representation
//
//   q(s) = (beta/(1-beta)) s^{-1/(1-beta)} (1/pi)
//          * Int_0^pi A(u) exp(-s^{-beta/(1-beta)} A(u)) du,
//   A(u) = [ sin(beta u)^beta sin((1-beta)u)^{1-beta} / sin(u) ]^{1/(1-beta)},
//
// integrated in log space around the peak of the integrand, which keeps it
// stable from the deep left tail through moderate s.  The convergent
// alternating series
//
//   q(s) = (1/pi) sum_{k>=1} (-1)^{k+1} Gamma(k beta + 1)/k! sin(pi k beta)
//          s^{-k beta - 1}
//
// serves as an independent cross-check and takes over far in the right
// tail, beyond the point where the two agree to ~1e-10.
//
// Construction builds piecewise-Chebyshev interpolants of log q (split at
// s=1, with the left branch fitted after removing the exact exponential
// factor) so that a single evaluation costs two Clenshaw sums.  All methods
// are const and safe for concurrent use.
class StableDensity {
public:
    explicit StableDensity(double beta);

    double beta() const { return beta_; }

    // log density of the standard law; -inf when it underflows.
    double log_density(double s) const;
    double density(double s) const;

    // direct integral evaluation, bypassing the interpolants
    double log_density_direct(double s) const;
    // right-tail series; valid (and used) for s >= series_from()
    double log_density_series(double s) const;
    double series_from() const { return series_from_; }

    double cdf(double s) const;
    double upper_tail(double s) const; // 1 - cdf, analytic far right tail

    // worst log-density gap between interpolant and direct evaluation seen
    // during the post-build self-check
    double fit_error() const { return fit_error_; }

    // shared per-index cache (build once, read many)
    static std::shared_ptr<const StableDensity> get(double beta);

private:
    double log_A(double u) const;
    double dlogA_du(double u) const;
    double solve_logA(double target) const; // A strictly increasing
    double log_peak_integral(double x, int panels_per_side) const;
    double log_integral(double x) const; // log Int_0^pi A e^{-xA} du
    void build_cdf();

    double beta_;
    double one_minus_beta_;
    double a0_;        // lim_{u->0} A(u) = (1-beta) beta^{beta/(1-beta)}
    double log_a0_;
    double tail_exp_;  // prefactor exponent (2-beta)/(2(1-beta)) of the left tail
    double series_from_ = 1e6;

    num::PiecewiseChebyshev cheb_left_;  // residual of log q on [s_floor, 1]
    num::PiecewiseChebyshev cheb_right_; // log q on [1, series_from]
    double s_floor_ = 1e-8;
    double fit_error_ = 0.0;

    num::MonotoneCubic cdf_;  // F vs ln s
    double cdf_lo_ = 0.0, cdf_hi_ = 0.0;
};

enum class LaplaceKind { X, T, Z_t, X_t };

// Exponent e(lambda) of the four transforms used throughout; the sign
// convention per kind is documented in the implementation:
//   X   -> lambda^alpha                       E exp(-l X_s) = exp(+s e)
//   T   -> lambda^(1/alpha)                   E exp(-l T_x) = exp(-x e)
//   Z_t -> (l+t)^alpha - l^alpha - t^alpha    E exp(-l Z_s) = exp(-s e)
//   X_t -> (l+t)^alpha - t^alpha              E exp(-l X_s) = exp(+s e)
double laplace_exponent(const StableParams& p, LaplaceKind kind, double t, double lambda);

// Density of the ladder-time subordinator at s for level x (scaling form
// x^{-alpha} q1(s x^{-alpha})).
double q_density(const StableParams& p, double x, double s);
double log_q_density(const StableParams& p, double x, double s);
double q_cdf(const StableParams& p, double x, double s);

// Density of the spectrally positive stable marginal at non-positive
// arguments, via the ballot relation q_x(s) = (x/s) p_s(-x).
double p_density(const StableParams& p, double s, double x);
double log_p_density(const StableParams& p, double s, double x);

// Density at s in (0,1) of a size-biased pick from the jumps of the
// subordinator run to level z, conditioned on total 1.
double size_biased_density(const StableParams& p, double z, double s);

// Gamma(1 + (k-1)/alpha) / Gamma(1 - 1/alpha): the k/alpha-th moment of the
// large-time limit measure.
double rho_inf_moment(const StableParams& p, int k);

} // namespace stfrag

#endif
