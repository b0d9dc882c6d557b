#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "finsler/metric.hpp"
#include "finsler/numerics.hpp"
#include "finsler/wind.hpp"

namespace finsler {

/**
 * Navigation datum (F, V): a positive definite base metric and a wind field.
 * With F(x, -V(x)) > 1 (strong wind) the construction produces a Lorentz
 * cone metric on the set of shifted vectors y + F(x,y) V(x) taken over the
 * pre-cone {y : <y, V>_y < -F(x,y)}; with F(x, -V(x)) < 1 it produces an
 * ordinary Finsler metric. `dilation` is the homothety constant of V when
 * known (1/2 for the radial field and the Euclidean metric).
 */
struct NavigationDatum {
    MetricDescriptor base;
    VectorFieldSpec wind;
    std::optional<double> dilation;
};

enum class WindRegime { Weak, Strong };

inline WindRegime wind_regime(const NavigationDatum& d, const Vec& x) {
    const double fw = d.base.value(x, -d.wind(x));
    if (fw == 1.0) throw NavigationRegimeViolation("wind_regime: F(x, -V(x)) == 1 is unsupported");
    return fw > 1.0 ? WindRegime::Strong : WindRegime::Weak;
}

/// Shift a pre-cone vector through the navigation construction:
/// returns y + F(x,y) V(x). In the strong-wind regime the pre-cone
/// condition <y, V>_y < -F(x,y) is enforced.
inline Vec forward_map(const NavigationDatum& d, const Vec& x, const Vec& y,
                       const NumericsConfig& cfg = {}) {
    const Vec v = d.wind(x);
    const double f = d.base.value(x, y);
    if (wind_regime(d, x) == WindRegime::Strong) {
        const double yv = inner(d.base, x, y, y, v, cfg);
        if (!(yv < -f))
            throw PreConeViolation("forward_map: <y, V>_y >= -F(x,y), vector outside the pre-cone");
    }
    return y + f * v;
}

namespace detail {

/// g(t) = F(x, ytilde - t V(x)) - t, the scalar form of the navigation
/// inversion: its larger root (strong wind) carries the Lorentz branch,
/// where the slope of F(x, ytilde - t V) in t exceeds 1. g is convex in t.
struct NavScalar {
    const MetricDescriptor& base;
    const Vec& x;
    const Vec& ytilde;
    const Vec& v;

    double operator()(double t) const { return base.value(x, ytilde - t * v) - t; }

    double slope(double t) const {
        // d/dt F(x, ytilde - tV) via a first-order seed, minus 1.
        const Dual2 f = base.eval2(lift(x), seed_s(ytilde - t * v, -v));
        return f.ds - 1.0;
    }
};

/// Minimize the convex g over [0, hi] by golden-section; hi is grown until
/// the minimum is interior.
inline std::pair<double, double> minimize_nav_scalar(const NavScalar& g, double scale) {
    double hi = std::max(scale, 1e-8);
    double ghi = g(hi);
    for (int i = 0; i < 80; ++i) {
        const double g2 = g(2.0 * hi);
        if (g2 > ghi) break;
        hi *= 2.0;
        ghi = g2;
    }
    hi *= 2.0;
    double a = 0.0, b = hi;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), dpt = a + phi * (b - a);
    double gc = g(c), gd = g(dpt);
    for (int i = 0; i < 200 && (b - a) > 1e-13 * (1.0 + hi); ++i) {
        if (gc < gd) {
            b = dpt;
            dpt = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = dpt;
            gc = gd;
            dpt = a + phi * (b - a);
            gd = g(dpt);
        }
    }
    const double tm = 0.5 * (a + b);
    return {tm, g(tm)};
}

/// Safeguarded Newton/bisection for the root of g on [lo, hi] with
/// g(lo) < 0 < g(hi).
inline double solve_nav_root(const NavScalar& g, double lo, double hi,
                             const NumericsConfig& cfg) {
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        const double gt = g(t);
        if (std::abs(gt) <= cfg.newton_tol * (1.0 + std::abs(t))) return t;
        if (gt < 0)
            lo = t;
        else
            hi = t;
        const double sl = g.slope(t);
        double tn = (sl != 0.0) ? t - gt / sl : 0.5 * (lo + hi);
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        t = tn;
    }
    throw NewtonDivergence("navigation inverse: Newton failed to converge");
}

}  // namespace detail

/// True iff ytilde lies in the (margin-shrunk) admissible cone at x: some
/// positive multiple of ytilde lands on V(x) + {F < 1}. Reduced to a 1-D
/// convex minimization of u -> F(x, u*ytilde - V(x)).
inline bool cone_membership(const NavigationDatum& d, const Vec& x, const Vec& ytilde,
                            const NumericsConfig& cfg = {}) {
    if (ytilde.norm() == 0.0) return false;
    if (wind_regime(d, x) == WindRegime::Weak) return true;
    const Vec v = d.wind(x);
    const detail::NavScalar g{d.base, x, ytilde, v};
    const double scale = std::max(d.base.value(x, ytilde), 1e-12);
    const auto [tm, gm] = detail::minimize_nav_scalar(g, scale);
    // g(t)/t = F(x, ytilde/t - V) - 1, so the margin test on the generating
    // ball F < 1 - margin is gm <= -margin * tm.
    return gm <= -cfg.cone_margin * std::max(tm, 1e-300);
}

/// Metric value of the navigation-induced metric at (x, ytilde): the root t
/// of t = F(x, ytilde - t V(x)), taking the Lorentz branch (larger root)
/// under strong wind and the unique root under weak wind.
inline double induced_value(const NavigationDatum& d, const Vec& x, const Vec& ytilde,
                            const NumericsConfig& cfg = {}) {
    const Vec v = d.wind(x);
    const detail::NavScalar g{d.base, x, ytilde, v};
    const double scale = std::max(d.base.value(x, ytilde), 1e-12);
    if (wind_regime(d, x) == WindRegime::Strong) {
        const auto [tm, gm] = detail::minimize_nav_scalar(g, scale);
        if (!(gm <= -cfg.cone_margin * std::max(tm, 1e-300)))
            throw ConeViolation("induced_value: vector outside the admissible cone");
        double hi = std::max(2.0 * tm, 1e-8);
        double ghi = g(hi);
        for (int i = 0; i < 200 && ghi <= 0.0; ++i) {
            hi *= 2.0;
            ghi = g(hi);
        }
        if (ghi <= 0.0) throw ConeViolation("induced_value: upper root not bracketed");
        return detail::solve_nav_root(g, tm, hi, cfg);
    }
    // Weak wind: g decreases through its unique root.
    double hi = std::max(scale, 1e-8);
    for (int i = 0; i < 200 && g(hi) > 0.0; ++i) hi *= 2.0;
    if (g(hi) > 0.0) throw ConeViolation("induced_value: root not bracketed (weak wind)");
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= cfg.newton_tol * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

/// Invert the navigation shift: the y with forward_map(d, x, y) = ytilde.
inline Vec inverse_map(const NavigationDatum& d, const Vec& x, const Vec& ytilde,
                       const NumericsConfig& cfg = {}) {
    if (wind_regime(d, x) == WindRegime::Strong && !cone_membership(d, x, ytilde, cfg))
        throw ConeViolation("inverse_map: ytilde outside the admissible cone");
    const double t = induced_value(d, x, ytilde, cfg);
    return ytilde - t * d.wind(x);
}

/**
 * Navigation-induced metric value in the Dual2 algebra. The root is located
 * in plain doubles, then a few Newton corrections run in Dual2 arithmetic so
 * the first and second derivative parts settle onto the implicit solution.
 * The contraction factor of the corrected iteration is ~0 at the root, so
 * four passes leave the jet exact to roundoff.
 */
inline Dual2 induced_eval2(const NavigationDatum& d, const DVec& x, const DVec& ytilde,
                           const NumericsConfig& cfg = {}) {
    const Vec xv = values(x);
    const Vec yv = values(ytilde);
    const double t0 = induced_value(d, xv, yv, cfg);
    const DVec w = d.wind.eval2(x);
    const Vec wv = values(w);
    const detail::NavScalar g{d.base, xv, yv, wv};
    Dual2 t(t0);
    for (int k = 0; k < 4; ++k) {
        DVec shifted(ytilde.size());
        for (std::size_t i = 0; i < ytilde.size(); ++i) shifted[i] = ytilde[i] - t * w[i];
        const Dual2 psi = d.base.eval2(x, shifted);
        const double denom = g.slope(t.v);  // d(F - t)/dt, bounded away from 0 off the branch point
        if (denom == 0.0) throw NewtonDivergence("induced_eval2: vanishing slope at the root");
        t = t - (psi - t) / denom;
    }
    return t;
}

/**
 * Residual of the fundamental tensor relation between F and the induced
 * metric, sampled over a basis of the indicatrix tangent space at y
 * (normalized to F(x,y) = 1). Strong wind compares against
 * <u,v>_y / (1 + <y,V>_y); weak wind against (1 - <ytilde,V>_ytilde) <u,v>_ytilde.
 */
inline double tensor_relation_residual(const NavigationDatum& d, const MetricDescriptor& induced,
                                       const Vec& x, const Vec& y_in,
                                       const NumericsConfig& cfg = {}) {
    const Vec y = y_in / d.base.value(x, y_in);
    const Vec ytilde = forward_map(d, x, y, cfg);
    const TensorValue gF = fundamental_tensor(d.base, x, y, cfg);
    const TensorValue gT = fundamental_tensor(induced, x, ytilde, cfg);

    // Basis of the g_y-orthogonal complement of y: project coordinate axes
    // and drop the most y-aligned one.
    const int n = d.base.dim;
    const double yy = y.dot(gF.matrix * y);
    int drop = 0;
    y.cwiseAbs().maxCoeff(&drop);
    std::vector<Vec> basis;
    for (int i = 0; i < n; ++i) {
        if (i == drop) continue;
        const Vec e = detail::axis(n, i);
        basis.push_back(e - (y.dot(gF.matrix * e) / yy) * y);
    }

    double factor;
    if (wind_regime(d, x) == WindRegime::Strong) {
        const double yv = y.dot(gF.matrix * d.wind(x));
        factor = 1.0 / (1.0 + yv);
    } else {
        const double tv = ytilde.dot(gT.matrix * d.wind(x));
        factor = 1.0 - tv;
    }

    double worst = 0.0;
    for (const Vec& u : basis) {
        for (const Vec& v : basis) {
            const double lhs = u.dot(gT.matrix * v);
            const double rhs = factor * u.dot(gF.matrix * v);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

}  // namespace finsler
