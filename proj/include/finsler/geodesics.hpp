#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "finsler/metric.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

/// A sampled constant-speed geodesic. `c0` records <V(x(0)), v(0)>_v(0) when
/// a wind field is attached by the caller.
struct GeodesicRecord {
    struct Sample {
        double t;
        Vec x;
        Vec v;
    };
    std::vector<Sample> samples;
    MetricKind metric_kind = MetricKind::FinslerPositiveDefinite;
    std::optional<double> c0;
};

/// Spray coefficients G^i = 1/4 g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}).
/// The mixed term is one forward-mode pass per component, seeding x along y
/// and y along the corresponding axis.
inline Vec spray_coeffs(const MetricDescriptor& m, const Vec& x, const Vec& y,
                        const NumericsConfig& cfg = {}) {
    const TensorValue g = fundamental_tensor(m, x, y, cfg);
    const int n = m.dim;
    Vec rhs(n);
    for (int l = 0; l < n; ++l) {
        const Vec el = detail::axis(n, l);
        const Dual2 mixed = m.eval2(seed_s(x, y), seed_t(y, el));
        detail::require_finite(mixed, "spray_coeffs");
        const Dual2 fx = m.eval2(seed_s(x, el), lift(y));
        detail::require_finite(fx, "spray_coeffs");
        const Dual2 m2 = mixed * mixed;
        const Dual2 fx2 = fx * fx;
        rhs[l] = m2.dst - fx2.ds;  // [F^2]_{x^k y^l} y^k - [F^2]_{x^l}
    }
    return 0.25 * g.matrix.partialPivLu().solve(rhs);
}

/// Classical fixed-step 4th-order integration of xdot = v, vdot = -2 G(x, v).
/// Admissibility is checked at every stage point; the first failure aborts
/// with the time of the step being attempted.
inline GeodesicRecord integrate_geodesic(const MetricDescriptor& m, const Vec& x0, const Vec& y0,
                                         double horizon, const NumericsConfig& cfg = {}) {
    cfg.validate();
    if (!m.admissible(x0, y0))
        throw DomainExit(0.0, "integrate_geodesic: initial condition is not admissible");

    const auto accel = [&](double t, const Vec& x, const Vec& v) -> Vec {
        if (!m.admissible(x, v))
            throw DomainExit(t, "integrate_geodesic: trajectory left the admissible set");
        return -2.0 * spray_coeffs(m, x, v, cfg);
    };

    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(horizon) / cfg.ode_step)));
    const double h = horizon / steps;

    GeodesicRecord rec;
    rec.metric_kind = m.kind;
    rec.samples.push_back({0.0, x0, y0});
    Vec x = x0, v = y0;
    for (int k = 0; k < steps; ++k) {
        const double t = k * h;
        const Vec a1 = accel(t, x, v);
        const Vec a2 = accel(t + 0.5 * h, x + 0.5 * h * v, v + 0.5 * h * a1);
        const Vec a3 = accel(t + 0.5 * h, x + 0.5 * h * v + 0.25 * h * h * a1, v + 0.5 * h * a2);
        const Vec a4 = accel(t + h, x + h * v + 0.5 * h * h * a2, v + h * a3);
        x += h * v + h * h / 6.0 * (a1 + a2 + a3);
        v += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        rec.samples.push_back({(k + 1) * h, x, v});
    }
    return rec;
}

/// Relative speed drift max_t |F(x,v) - F0| / F0 along a record.
inline double speed_drift(const MetricDescriptor& m, const GeodesicRecord& rec) {
    const double f0 = m.value(rec.samples.front().x, rec.samples.front().v);
    double worst = 0.0;
    for (const auto& s : rec.samples)
        worst = std::max(worst, std::abs(m.value(s.x, s.v) - f0) / f0);
    return worst;
}

/// Cubic Hermite interpolation of a record at parameter s (position and
/// velocity); accuracy matches the order of the integrator.
inline std::pair<Vec, Vec> interpolate(const GeodesicRecord& rec, double s) {
    const auto& smp = rec.samples;
    if (smp.size() < 2) throw Error("interpolate: record needs at least two samples");
    const double t0 = smp.front().t, t1 = smp.back().t;
    const double lo = std::min(t0, t1), hi = std::max(t0, t1);
    if (s < lo - 1e-12 || s > hi + 1e-12)
        throw HypothesisViolation("interpolate: parameter outside the recorded range");
    std::size_t i = 0;
    while (i + 2 < smp.size() &&
           !((s - smp[i].t) * (s - smp[i + 1].t) <= 0.0))
        ++i;
    const auto& a = smp[i];
    const auto& b = smp[i + 1];
    const double h = b.t - a.t;
    const double u = (s - a.t) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    const Vec x = h00 * a.x + h10 * h * a.v + h01 * b.x + h11 * h * b.v;
    // Derivative of the Hermite form, dividing out the chart scale h.
    const double d00 = (6 * u2 - 6 * u) / h, d10 = 3 * u2 - 4 * u + 1;
    const double d01 = (-6 * u2 + 6 * u) / h, d11 = 3 * u2 - 2 * u;
    const Vec v = d00 * a.x + d10 * a.v + d01 * b.x + d11 * b.v;
    return {x, v};
}

/// CSV export: t, x_1..x_n, v_1..v_n, speed. 17 significant digits.
inline void write_trajectory_csv(std::ostream& os, const MetricDescriptor& m,
                                 const GeodesicRecord& rec) {
    const int n = m.dim;
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= n; ++i) os << ",v" << i;
    os << ",speed\n";
    char buf[64];
    const auto put = [&](double val) {
        std::snprintf(buf, sizeof buf, "%.17g", val);
        os << buf;
    };
    for (const auto& s : rec.samples) {
        put(s.t);
        for (int i = 0; i < n; ++i) {
            os << ',';
            put(s.x[i]);
        }
        for (int i = 0; i < n; ++i) {
            os << ',';
            put(s.v[i]);
        }
        os << ',';
        put(m.value(s.x, s.v));
        os << '\n';
    }
}

}  // namespace finsler
