#include "stfrag/numerics.hpp"

#include "stfrag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace stfrag::num {

namespace {

GaussLegendre compute_gl(int n) {
    GaussLegendre r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev-angle initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return r;
}

} // namespace

const GaussLegendre& gauss_legendre(int order) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gl(order)).first;
    return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int order) {
    const auto& gl = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < order; ++i)
        acc += gl.weights[i] * f(mid + half * gl.nodes[i]);
    return acc * half;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole,
                   double abs_tol, double rel_tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 ||
        std::abs(delta) <= 15.0 * std::max(abs_tol, rel_tol * std::abs(left + right)))
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * abs_tol, rel_tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * abs_tol, rel_tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol, int max_depth) {
    if (!(b > a)) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, rel_tol, max_depth);
}

PiecewiseChebyshev::PiecewiseChebyshev(const std::function<double(double)>& f,
                                       double lo, double hi, int panels, int degree)
    : lo_(lo), hi_(hi), panels_(panels), degree_(degree) {
    if (!(hi > lo) || panels < 1 || degree < 1)
        throw domain_error("PiecewiseChebyshev: bad fit parameters");
    panel_width_ = (hi - lo) / panels;
    const int n = degree + 1;
    coeff_.assign(static_cast<std::size_t>(panels) * n, 0.0);
    std::vector<double> fv(n);
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * panel_width_;
        const double mid = a + 0.5 * panel_width_, half = 0.5 * panel_width_;
        for (int j = 0; j < n; ++j)
            fv[j] = f(mid + half * std::cos(M_PI * (j + 0.5) / n));
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                acc += fv[j] * std::cos(M_PI * k * (j + 0.5) / n);
            coeff_[static_cast<std::size_t>(p) * n + k] = (k == 0 ? 1.0 : 2.0) * acc / n;
        }
    }
}

double PiecewiseChebyshev::operator()(double x) const {
    if (coeff_.empty()) throw domain_error("PiecewiseChebyshev: empty");
    x = std::clamp(x, lo_, hi_);
    int p = static_cast<int>((x - lo_) / panel_width_);
    p = std::clamp(p, 0, panels_ - 1);
    const double a = lo_ + p * panel_width_;
    const double t = 2.0 * (x - a) / panel_width_ - 1.0; // [-1,1]
    const double* c = &coeff_[static_cast<std::size_t>(p) * (degree_ + 1)];
    double b1 = 0.0, b2 = 0.0;
    for (int k = degree_; k >= 1; --k) {
        const double b0 = 2.0 * t * b1 - b2 + c[k];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + c[0];
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw domain_error("MonotoneCubic: need >= 2 knots");
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = x_[i + 1] - x_[i];
        if (!(h > 0.0)) throw domain_error("MonotoneCubic: x not strictly increasing");
        d[i] = (y_[i + 1] - y_[i]) / h;
    }
    m_.assign(n, 0.0);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0)
            m_[i] = 0.0;
        else {
            // harmonic mean keeps the interpolant monotone on monotone data
            const double w1 = 2.0 * (x_[i + 1] - x_[i]) + (x_[i] - x_[i - 1]);
            const double w2 = (x_[i + 1] - x_[i]) + 2.0 * (x_[i] - x_[i - 1]);
            m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    // Fritsch-Carlson limiter
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (d[i] == 0.0) {
            m_[i] = m_[i + 1] = 0.0;
        } else {
            const double a = m_[i] / d[i], b = m_[i + 1] / d[i];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double tau = 3.0 / std::sqrt(s);
                m_[i] = tau * a * d[i];
                m_[i + 1] = tau * b * d[i];
            }
        }
    }
}

double MonotoneCubic::operator()(double x) const {
    if (x_.empty()) throw domain_error("MonotoneCubic: empty");
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    const double h10 = t * (1.0 - t) * (1.0 - t);
    const double h01 = t * t * (3.0 - 2.0 * t);
    const double h11 = t * t * (t - 1.0);
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double MonotoneCubic::inverse(double y) const {
    if (x_.empty()) throw domain_error("MonotoneCubic: empty");
    if (y <= y_.front()) return x_.front();
    if (y >= y_.back()) return x_.back();
    const auto it = std::upper_bound(y_.begin(), y_.end(), y);
    std::size_t i = static_cast<std::size_t>(it - y_.begin());
    i = (i == 0) ? 0 : i - 1;
    double a = x_[i], b = x_[std::min(i + 1, x_.size() - 1)];
    if (!(b > a)) return a;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (a + b);
        if ((*this)(mid) < y)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

} // namespace stfrag::num
