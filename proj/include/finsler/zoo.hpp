#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "finsler/metric.hpp"
#include "finsler/navigation.hpp"
#include "finsler/numerics.hpp"
#include "finsler/wind.hpp"

namespace finsler {

/// Funk-type metrics are kept away from the singular sphere |x| = 1 and from
/// the far field where the solves lose conditioning.
inline constexpr double kFunkRegionMin = 1.1;
inline constexpr double kFunkRegionMax = 10.0;

/// F(x, y) = |y|.
inline MetricDescriptor euclidean(int n) {
    MetricDescriptor m;
    m.dim = n;
    m.kind = MetricKind::FinslerPositiveDefinite;
    m.name = "euclidean";
    m.eval2 = [](const DVec&, const DVec& y) { return sqrt(dot(y, y)); };
    m.admissible = [](const Vec&, const Vec& y) { return y.norm() > 0.0; };
    return m;
}

/// F(y) = (sum y_i^4)^{1/4}, an x-independent non-Riemannian norm.
inline MetricDescriptor minkowski_quartic(int n) {
    MetricDescriptor m;
    m.dim = n;
    m.kind = MetricKind::FinslerPositiveDefinite;
    m.name = "minkowski-quartic";
    m.eval2 = [](const DVec&, const DVec& y) {
        Dual2 s(0.0);
        for (const Dual2& yi : y) {
            const Dual2 q = yi * yi;
            s = s + q * q;
        }
        return pow(s, 0.25);
    };
    m.admissible = [](const Vec&, const Vec& y) { return y.norm() > 0.0; };
    return m;
}

/// Weak-wind navigation of the Euclidean metric in closed form:
/// F(x,y) = (sqrt((1 - |V|^2)|y|^2 + <V,y>^2) - <V,y>) / (1 - |V|^2).
inline MetricDescriptor randers_navigation(int n, const VectorFieldSpec& wind) {
    MetricDescriptor m;
    m.dim = n;
    m.kind = MetricKind::FinslerPositiveDefinite;
    m.name = "randers";
    m.eval2 = [wind](const DVec& x, const DVec& y) {
        const DVec v = wind.eval2(x);
        const Dual2 vv = dot(v, v);
        if (vv.v >= 1.0)
            throw NavigationRegimeViolation("randers: |V(x)| >= 1 leaves the weak-wind regime");
        const Dual2 vy = dot(v, y);
        const Dual2 one_minus = 1.0 - vv;
        return (sqrt(one_minus * dot(y, y) + vy * vy) - vy) / one_minus;
    };
    m.admissible = [wind](const Vec& x, const Vec& y) {
        return y.norm() > 0.0 && wind(x).squaredNorm() < 1.0;
    };
    return m;
}

/**
 * The Lorentz Funk metric on {|x| > 1}:
 *
 *   F(x,y) = (sqrt(<x,y>^2 - (|x|^2 - 1)|y|^2) - <x,y>) / (|x|^2 - 1)
 *
 * with admissible cone {y : <x,y> < 0, <x,y>^2 > (|x|^2 - 1)|y|^2}. This is
 * the closed form of the strong-wind navigation of the Euclidean metric by
 * the radial field V = -x.
 */
inline MetricDescriptor lorentz_funk(int n, const NumericsConfig& cfg = {}) {
    const double margin = cfg.cone_margin;
    MetricDescriptor m;
    m.dim = n;
    m.kind = MetricKind::LorentzCone;
    m.name = "lorentz-funk";
    m.eval2 = [](const DVec& x, const DVec& y) {
        const Dual2 xx = dot(x, x);
        if (xx.v <= kFunkRegionMin * kFunkRegionMin || xx.v >= kFunkRegionMax * kFunkRegionMax)
            throw DomainViolation("lorentz-funk: |x| outside the working region");
        const Dual2 xy = dot(x, y);
        const Dual2 disc = xy * xy - (xx - 1.0) * dot(y, y);
        if (disc.v <= 0.0 || xy.v >= 0.0)
            throw DomainViolation("lorentz-funk: y outside the admissible cone");
        return (sqrt(disc) - xy) / (xx - 1.0);
    };
    m.admissible = [margin](const Vec& x, const Vec& y) {
        const double r = x.norm();
        if (r <= kFunkRegionMin || r >= kFunkRegionMax) return false;
        const double yy = y.squaredNorm();
        if (yy == 0.0) return false;
        const double xy = x.dot(y);
        if (xy >= 0.0) return false;
        // Euclidean distance from the ray through y, shifted by x, to 0:
        // inside the cone iff it stays below 1 with the configured margin.
        const double d2 = x.squaredNorm() - xy * xy / yy;
        const double lim = 1.0 - margin;
        return d2 <= lim * lim;
    };
    return m;
}

/// Generic strong-wind navigation: the evaluator solves the scalar
/// navigation equation per call (nothing is cached), the admissible
/// predicate is cone membership.
inline MetricDescriptor navigation_induced(const MetricDescriptor& base,
                                           const VectorFieldSpec& wind,
                                           const NumericsConfig& cfg = {}) {
    if (base.kind != MetricKind::FinslerPositiveDefinite)
        throw KindViolation("navigation_induced: the base metric must be positive definite");
    NavigationDatum d{base, wind, std::nullopt};
    MetricDescriptor m;
    m.dim = base.dim;
    m.kind = MetricKind::LorentzCone;
    m.name = "navigation(" + base.name + ")";
    m.eval2 = [d, cfg](const DVec& x, const DVec& y) {
        if (wind_regime(d, values(x)) != WindRegime::Strong)
            throw NavigationRegimeViolation(
                "navigation_induced: F(x, -V(x)) <= 1, no Lorentz branch at this point");
        return induced_eval2(d, x, y, cfg);
    };
    m.admissible = [d, cfg](const Vec& x, const Vec& y) {
        if (wind_regime(d, x) != WindRegime::Strong) return false;
        return cone_membership(d, x, y, cfg);
    };
    return m;
}

}  // namespace finsler
