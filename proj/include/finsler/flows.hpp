#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "finsler/geodesics.hpp"
#include "finsler/metric.hpp"
#include "finsler/navigation.hpp"
#include "finsler/numerics.hpp"
#include "finsler/wind.hpp"
#include "finsler/zoo.hpp"

namespace finsler {

/// Time reparameterization linking a homothetic flow of dilation c to the
/// base geodesic parameter: t for c = 0, (e^{2ct} - 1)/(2c) otherwise.
/// Continuous in c at 0.
inline double reparam(double c, double t) {
    if (c == 0.0) return t;
    return std::expm1(2.0 * c * t) / (2.0 * c);
}

/// One-parameter flow of a wind field with its tangent maps. Linear fields
/// (including V = -x) use the closed form e^{At}; analytic fields fall back
/// to fixed-step 4th-order integration with the variational equation carried
/// alongside for the tangent map.
struct FlowMap {
    VectorFieldSpec generator;
    double dilation = 0.0;
    NumericsConfig cfg;

    Vec apply(double t, const Vec& x) const {
        switch (generator.kind) {
            case VectorFieldSpec::Kind::Constant:
                return x + t * generator.constant_value;
            case VectorFieldSpec::Kind::RadialNegative:
                return std::exp(-t) * x;
            case VectorFieldSpec::Kind::Linear:
                return (generator.linear_matrix * t).exp() * x;
            case VectorFieldSpec::Kind::Analytic:
                return integrate(t, x).first;
        }
        throw Error("FlowMap: unreachable kind");
    }

    Vec tangent(double t, const Vec& x, const Vec& u) const {
        switch (generator.kind) {
            case VectorFieldSpec::Kind::Constant:
                return u;
            case VectorFieldSpec::Kind::RadialNegative:
                return std::exp(-t) * u;
            case VectorFieldSpec::Kind::Linear:
                return (generator.linear_matrix * t).exp() * u;
            case VectorFieldSpec::Kind::Analytic:
                return integrate(t, x).second * u;
        }
        throw Error("FlowMap: unreachable kind");
    }

private:
    std::pair<Vec, Mat> integrate(double horizon, const Vec& x0) const {
        const int n = generator.dim;
        Vec x = x0;
        Mat j = Mat::Identity(n, n);
        if (horizon == 0.0) return {x, j};
        const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(horizon) / cfg.ode_step)));
        const double h = horizon / steps;
        const auto check = [](const Vec& p) {
            if (!p.allFinite() || p.norm() > 1e6)
                throw FlowEscape("FlowMap: trajectory escaped the working region");
        };
        for (int k = 0; k < steps; ++k) {
            const Vec k1 = generator(x);
            const Mat j1 = generator.jacobian(x) * j;
            const Vec x2 = x + 0.5 * h * k1;
            check(x2);
            const Vec k2 = generator(x2);
            const Mat j2 = generator.jacobian(x2) * (j + 0.5 * h * j1);
            const Vec x3 = x + 0.5 * h * k2;
            check(x3);
            const Vec k3 = generator(x3);
            const Mat j3 = generator.jacobian(x3) * (j + 0.5 * h * j2);
            const Vec x4 = x + h * k3;
            check(x4);
            const Vec k4 = generator(x4);
            const Mat j4 = generator.jacobian(x4) * (j + h * j3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            j += h / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
            check(x);
        }
        return {x, j};
    }
};

/// Known dilations for the Euclidean metric: 0 for constant winds, 1/2 for
/// V = -x, -trace-conformal part for linear winds. Callers may override.
inline FlowMap flow(const VectorFieldSpec& v, const NumericsConfig& cfg = {},
                    std::optional<double> dilation = std::nullopt) {
    FlowMap f;
    f.generator = v;
    f.cfg = cfg;
    if (dilation) {
        f.dilation = *dilation;
    } else {
        switch (v.kind) {
            case VectorFieldSpec::Kind::Constant:
                f.dilation = 0.0;
                break;
            case VectorFieldSpec::Kind::RadialNegative:
                f.dilation = 0.5;
                break;
            case VectorFieldSpec::Kind::Linear:
                f.dilation = -v.linear_matrix.trace() / (2.0 * v.dim);
                break;
            case VectorFieldSpec::Kind::Analytic:
                f.dilation = 0.0;  // no closed form; use fit_dilation or override
                break;
        }
    }
    return f;
}

/// Least-squares fit of the dilation from F(psi_t x, (psi_t)_* y) =
/// e^{-2ct} F(x, y) over the supplied samples.
inline double fit_dilation(const MetricDescriptor& m, const FlowMap& psi,
                           const std::vector<std::pair<Vec, Vec>>& samples, double t = 0.25) {
    double acc = 0.0;
    int used = 0;
    for (const auto& [x, y] : samples) {
        const double f0 = m.value(x, y);
        const double ft = m.value(psi.apply(t, x), psi.tangent(t, x, y));
        acc += -std::log(ft / f0) / (2.0 * t);
        ++used;
    }
    if (used == 0) throw Error("fit_dilation: no samples");
    return acc / used;
}

/// Residual of <V(x(t)), v(t)>_{v(t)} = c0 - 2 c t along a unit-speed
/// geodesic record. Non-geodesic inputs (speed drift above 1e-4) are
/// rejected.
inline double restriction_identity_residual(const MetricDescriptor& m, const VectorFieldSpec& v,
                                            double c, const GeodesicRecord& geo,
                                            const NumericsConfig& cfg = {}) {
    if (speed_drift(m, geo) > 1e-4)
        throw HypothesisViolation("restriction_identity_residual: input is not a constant-speed geodesic");
    const auto& first = geo.samples.front();
    if (std::abs(m.value(first.x, first.v) - 1.0) > 1e-4)
        throw HypothesisViolation("restriction_identity_residual: record must be unit speed");
    const Vec y0 = first.v / m.value(first.x, first.v);
    const double c0 = inner(m, first.x, y0, v(first.x), y0, cfg);
    double worst = 0.0;
    for (const auto& s : geo.samples) {
        const Vec yn = s.v / m.value(s.x, s.v);
        const double lhs = inner(m, s.x, yn, v(s.x), yn, cfg);
        worst = std::max(worst, std::abs(lhs - (c0 - 2.0 * c * s.t)));
    }
    return worst;
}

/**
 * Push a unit-speed base geodesic through the homothetic flow into a
 * unit-speed geodesic of the induced Lorentz metric:
 *
 *   gamma_tilde(t) = psi_t(gamma(reparam(c, t))),
 *   dgamma_tilde(t) = (psi_t)_* (e^{2ct} dgamma(reparam(c, t))) + V(gamma_tilde(t)).
 *
 * Requires c0 = <dgamma(0), V(gamma(0))>_{dgamma(0)} < -1.
 */
inline GeodesicRecord navigated_geodesic(const NavigationDatum& d, const FlowMap& psi,
                                         const GeodesicRecord& geo, double horizon,
                                         const NumericsConfig& cfg = {}) {
    cfg.validate();
    if (speed_drift(d.base, geo) > 1e-4)
        throw HypothesisViolation("navigated_geodesic: base record is not a constant-speed geodesic");
    const auto& first = geo.samples.front();
    if (std::abs(d.base.value(first.x, first.v) - 1.0) > 1e-4)
        throw HypothesisViolation("navigated_geodesic: base record must be unit speed");
    const Vec y0 = first.v / d.base.value(first.x, first.v);
    const double c0 = inner(d.base, first.x, y0, y0, d.wind(first.x), cfg);
    if (!(c0 < -1.0))
        throw HypothesisViolation("navigated_geodesic: <dgamma(0), V>_dgamma(0) >= -1");
    const double c = psi.dilation;

    GeodesicRecord out;
    out.metric_kind = MetricKind::LorentzCone;
    out.c0 = c0;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(horizon) / cfg.ode_step)));
    const double h = horizon / steps;
    for (int k = 0; k <= steps; ++k) {
        const double t = k * h;
        const double s = reparam(c, t);
        const auto [gx, gv] = interpolate(geo, s);
        const Vec gvn = gv / d.base.value(gx, gv);
        const Vec xt = psi.apply(t, gx);
        const Vec vt = psi.tangent(t, gx, std::exp(2.0 * c * t) * gvn) + d.wind(xt);
        out.samples.push_back({t, xt, vt});
    }
    return out;
}

/**
 * Residual of the transported-tensor identity along a navigated geodesic:
 * for v1, v2 orthogonal to the base velocity at gamma(reparam(c,t)),
 *
 *   <(psi_t)_* v1, (psi_t)_* v2>_{dgamma_tilde(t)} = e^{-2ct}/(c0 + 1) <v1, v2>_{dgamma}
 *
 * together with the transported orthogonality against dgamma_tilde(t).
 */
inline double orthogonality_transport_residual(const NavigationDatum& d,
                                               const MetricDescriptor& induced,
                                               const FlowMap& psi, const GeodesicRecord& geo,
                                               double t, const Vec& v1, const Vec& v2,
                                               const NumericsConfig& cfg = {}) {
    const double c = psi.dilation;
    const double s = reparam(c, t);
    const auto [gx, gv] = interpolate(geo, s);
    const Vec gvn = gv / d.base.value(gx, gv);
    const TensorValue gF = fundamental_tensor(d.base, gx, gvn, cfg);
    const double tol = 1e-8 * (1.0 + v1.norm() + v2.norm());
    if (std::abs(v1.dot(gF.matrix * gvn)) > tol || std::abs(v2.dot(gF.matrix * gvn)) > tol)
        throw HypothesisViolation("orthogonality_transport_residual: v1, v2 must be orthogonal to the base velocity");

    const auto& first = geo.samples.front();
    const Vec y0 = first.v / d.base.value(first.x, first.v);
    const double c0 = inner(d.base, first.x, y0, y0, d.wind(first.x), cfg);
    if (!(c0 < -1.0)) throw HypothesisViolation("orthogonality_transport_residual: c0 >= -1");

    const Vec xt = psi.apply(t, gx);
    const Vec vt = psi.tangent(t, gx, std::exp(2.0 * c * t) * gvn) + d.wind(xt);
    const Vec w1 = psi.tangent(t, gx, v1);
    const Vec w2 = psi.tangent(t, gx, v2);
    const TensorValue gT = fundamental_tensor(induced, xt, vt, cfg);

    const double lhs = w1.dot(gT.matrix * w2);
    const double rhs = std::exp(-2.0 * c * t) / (c0 + 1.0) * v1.dot(gF.matrix * v2);
    double worst = std::abs(lhs - rhs);
    worst = std::max(worst, std::abs(w1.dot(gT.matrix * vt)));
    worst = std::max(worst, std::abs(w2.dot(gT.matrix * vt)));
    return worst;
}

}  // namespace finsler
