#pragma once

#include <functional>
#include <utility>

#include "finsler/dual.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

/// Scalar map of one vector argument, evaluable in the Dual2 algebra.
using MapY = std::function<Dual2(const DVec&)>;
/// Scalar map of a point/vector pair.
using MapXY = std::function<Dual2(const DVec&, const DVec&)>;
/// Optional admissibility predicate guarding finite-difference probes.
using DomainPredicate = std::function<bool(const Vec&)>;

/// Value with first and second directional derivatives along two directions.
struct Jet2 {
    double value = 0.0;
    double d1 = 0.0;                       ///< derivative along u
    double d11 = 0.0, d12 = 0.0, d22 = 0.0;  ///< second derivatives; d12 == d21 by construction
};

namespace detail {

inline void require_finite(const Dual2& r, const char* where) {
    if (!isfinite(r)) throw NonFiniteEvaluation(std::string(where) + ": non-finite evaluation");
}

inline double probe(const MapY& map, const Vec& p, const DomainPredicate& domain,
                    const char* where) {
    if (domain && !domain(p)) throw DomainViolation(std::string(where) + ": probe point left the admissible domain");
    const Dual2 r = map(lift(p));
    if (!std::isfinite(r.v)) throw NonFiniteEvaluation(std::string(where) + ": non-finite evaluation");
    return r.v;
}

}  // namespace detail

/// Forward-mode jet of `map` at `base` along directions u and v: one pass
/// through the Dual2 algebra, exact to roundoff for smooth maps.
inline Jet2 jet2(const MapY& map, const Vec& base, const Vec& u, const Vec& v,
                 const NumericsConfig& cfg = {}) {
    cfg.validate();
    const Dual2 r = map(seed2(base, u, v));
    detail::require_finite(r, "jet2");
    return Jet2{r.v, r.ds, r.dss, r.dst, r.dtt};
}

/// Central-difference fallback for jet2; O(h^2) accurate. Each probe point is
/// validated against `domain` (when given) before evaluation.
inline Jet2 jet2_fd(const MapY& map, const Vec& base, const Vec& u, const Vec& v,
                    const NumericsConfig& cfg = {}, const DomainPredicate& domain = {}) {
    cfg.validate();
    const double h = cfg.fd_step * (1.0 + base.norm());
    const auto at = [&](double a, double b) {
        return detail::probe(map, base + a * u + b * v, domain, "jet2_fd");
    };
    Jet2 j;
    j.value = at(0, 0);
    j.d1 = (at(h, 0) - at(-h, 0)) / (2 * h);
    j.d11 = (at(h, 0) - 2 * j.value + at(-h, 0)) / (h * h);
    j.d22 = (at(0, h) - 2 * j.value + at(0, -h)) / (h * h);
    j.d12 = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
    return j;
}

/// Gradient of `map` in the point slot, forward mode.
inline Vec grad_x(const MapXY& map, const Vec& x, const Vec& y,
                  const NumericsConfig& cfg = {}) {
    cfg.validate();
    Vec g(x.size());
    const DVec yc = lift(y);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec e = Vec::Zero(x.size());
        e[i] = 1.0;
        const Dual2 r = map(seed_s(x, e), yc);
        detail::require_finite(r, "grad_x");
        g[i] = r.ds;
    }
    return g;
}

/// Central-difference fallback for grad_x, O(fd_step^2).
inline Vec grad_x_fd(const MapXY& map, const Vec& x, const Vec& y,
                     const NumericsConfig& cfg = {}, const DomainPredicate& domain_x = {}) {
    cfg.validate();
    const double h = cfg.fd_step * (1.0 + x.norm());
    const DVec yc = lift(y);
    const auto at = [&](const Vec& p) {
        if (domain_x && !domain_x(p))
            throw DomainViolation("grad_x_fd: probe point left the admissible domain");
        const Dual2 r = map(lift(p), yc);
        if (!std::isfinite(r.v)) throw NonFiniteEvaluation("grad_x_fd: non-finite evaluation");
        return r.v;
    };
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec e = Vec::Zero(x.size());
        e[i] = h;
        g[i] = (at(x + e) - at(x - e)) / (2 * h);
    }
    return g;
}

}  // namespace finsler
