#ifndef STFRAG_NUMERICS_HPP
#define STFRAG_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace stfrag::num {

// Gauss-Legendre rule on [-1,1]; nodes/weights computed once per order and
// cached.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int order);

// integral of f over [a,b] with an n-point rule
double gl_integrate(const std::function<double(double)>& f, double a, double b, int order);

// Adaptive Simpson with absolute/relative stopping; depth-limited.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol = 1e-12, int max_depth = 36);

// Chebyshev fit of f on equal panels of [lo, hi]; evaluation clamps to the
// fitted range.  Degree is the polynomial degree per panel.
class PiecewiseChebyshev {
public:
    PiecewiseChebyshev() = default;
    PiecewiseChebyshev(const std::function<double(double)>& f, double lo, double hi,
                       int panels, int degree);
    double operator()(double x) const;
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool empty() const { return coeff_.empty(); }

private:
    double lo_ = 0.0, hi_ = 1.0, panel_width_ = 1.0;
    int panels_ = 0, degree_ = 0;
    std::vector<double> coeff_; // panels_ x (degree_+1)
};

// Monotone (Fritsch-Carlson) cubic interpolant through (x_i, y_i) with
// strictly increasing x.  Preserves monotone data, so it is safe for CDFs.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;
    // Solve y = f(x) for monotone nondecreasing data by bisection.
    double inverse(double y) const;
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

private:
    std::vector<double> x_, y_, m_; // knots, values, knot slopes
};

} // namespace stfrag::num

#endif
