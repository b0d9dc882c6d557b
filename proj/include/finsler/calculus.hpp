#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "finsler/geodesics.hpp"
#include "finsler/metric.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

/// Smooth measure sigma(x) dx^1...dx^n given by its coordinate density.
struct MeasureDescriptor {
    std::function<double(const Vec&)> density;
    std::string label;
};

inline MeasureDescriptor measure_lebesgue() {
    return {[](const Vec&) { return 1.0; }, "lebesgue"};
}

inline MeasureDescriptor measure_constant(double sigma, std::string label) {
    return {[sigma](const Vec&) { return sigma; }, std::move(label)};
}

/// Smooth real function with an optional analytic differential; central
/// differences stand in when no differential is supplied.
struct ScalarField {
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> differential;  // may be empty

    double operator()(const Vec& x) const { return eval(x); }

    Vec d(const Vec& x, const NumericsConfig& cfg = {}) const {
        if (differential) return differential(x);
        const double h = cfg.fd_step * (1.0 + x.norm());
        Vec g(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            Vec e = Vec::Zero(x.size());
            e[i] = h;
            g[i] = (eval(x + e) - eval(x - e)) / (2.0 * h);
        }
        return g;
    }
};

/// Fiberwise Legendre map L(y) = <., y>_y, i.e. the y-gradient of F^2/2.
inline Vec legendre(const MetricDescriptor& m, const Vec& x, const Vec& y,
                    const NumericsConfig& cfg = {}) {
    detail::require_admissible(m, x, y, "legendre");
    (void)cfg;
    const int n = m.dim;
    Vec out(n);
    const DVec xc = lift(x);
    for (int i = 0; i < n; ++i) {
        const Dual2 f = m.eval2(xc, seed_s(y, detail::axis(n, i)));
        detail::require_finite(f, "legendre");
        const Dual2 f2 = f * f;
        out[i] = 0.5 * f2.ds;
    }
    return out;
}

namespace detail {

/// Damped Newton on L(y) = df from one seed; empty on failure.
inline std::optional<Vec> legendre_newton(const MetricDescriptor& m, const Vec& x, const Vec& df,
                                          Vec y, const NumericsConfig& cfg) {
    if (!m.admissible(x, y)) return std::nullopt;
    const double scale = 1.0 + df.norm();
    double res = (legendre(m, x, y, cfg) - df).norm();
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        if (res <= cfg.newton_tol * scale) return y;
        Mat g;
        try {
            g = fundamental_tensor(m, x, y, cfg).matrix;
        } catch (const DegenerateTensor&) {
            return std::nullopt;
        }
        const Vec step = g.partialPivLu().solve(df - legendre(m, x, y, cfg));
        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            const Vec yn = y + lambda * step;
            if (m.admissible(x, yn)) {
                const double rn = (legendre(m, x, yn, cfg) - df).norm();
                if (rn < res) {
                    y = yn;
                    res = rn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted) return std::nullopt;
    }
    return std::nullopt;
}

/// Canonical seed ladder. For Lorentz cones the central ray -x and small
/// in-cone perturbations of it; for positive definite metrics the covector
/// itself and the coordinate axes.
inline std::vector<Vec> legendre_seeds(const MetricDescriptor& m, const Vec& x, const Vec& df) {
    const int n = m.dim;
    std::vector<Vec> dirs;
    if (m.kind == MetricKind::LorentzCone) {
        const Vec center = -x.normalized();
        dirs.push_back(center);
        for (int i = 0; i < n; ++i) {
            dirs.push_back((center + 0.2 * axis(n, i)).normalized());
            dirs.push_back((center - 0.2 * axis(n, i)).normalized());
        }
    } else {
        if (df.norm() > 0) dirs.push_back(df.normalized());
        for (int i = 0; i < n; ++i) {
            dirs.push_back(axis(n, i));
            dirs.push_back(-axis(n, i));
        }
    }
    std::vector<Vec> seeds;
    for (const Vec& dir : dirs) {
        if (!m.admissible(x, dir)) continue;
        const double ln = legendre(m, x, dir).norm();
        if (!(ln > 0) || !std::isfinite(ln)) continue;
        seeds.push_back(dir * (df.norm() / ln));
        if (seeds.size() >= 8) break;
    }
    return seeds;
}

}  // namespace detail

/**
 * Inverse Legendre transform: the admissible y with <u, y>_y = df(u) for all
 * u. On a convex Lorentz cone the solution is unique, so any converged
 * admissible root is the answer; seeds are tried in order (caller-provided
 * first, then the canonical ladder).
 */
inline Vec legendre_gradient(const MetricDescriptor& m, const Vec& x, const Vec& df,
                             const NumericsConfig& cfg = {},
                             const std::optional<Vec>& init = std::nullopt) {
    cfg.validate();
    std::vector<Vec> seeds;
    if (init) seeds.push_back(*init);
    for (Vec& s : detail::legendre_seeds(m, x, df)) seeds.push_back(std::move(s));
    if (seeds.empty())
        throw LegendreOutOfRange("legendre_gradient: no admissible initialization at this point");
    for (const Vec& seed : seeds) {
        if (auto y = detail::legendre_newton(m, x, df, seed, cfg)) return *y;
    }
    throw LegendreOutOfRange(
        "legendre_gradient: no admissible solution found from any initialization");
}

namespace detail {

inline double halton(unsigned long long index, unsigned base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

}  // namespace detail

/**
 * Busemann-Hausdorff density: Vol(unit Euclidean ball) / Vol({F(x, .) <= 1}),
 * both volumes estimated over the same deterministic low-discrepancy point
 * set in a bounding box scaled from the axis intercepts of the indicatrix.
 * Sharing the point set makes the Euclidean density exactly 1 and cancels
 * most of the quadrature bias for near-spherical indicatrices.
 */
inline double bh_density(const MetricDescriptor& m, const Vec& x, const NumericsConfig& cfg = {}) {
    cfg.validate();
    if (m.kind != MetricKind::FinslerPositiveDefinite)
        throw KindViolation("bh_density: only defined for positive definite metrics");
    const int n = m.dim;
    double reach = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec e = detail::axis(n, i);
        reach = std::max(reach, 1.0 / m.value(x, e));
        reach = std::max(reach, 1.0 / m.value(x, -e));
    }
    const double half = 2.0 * reach;
    static constexpr unsigned kBases[] = {2, 3, 5, 7, 11, 13};
    long long in_body = 0, in_ball = 0;
    Vec p(n);
    for (long long k = 0; k < cfg.quad_samples; ++k) {
        for (int i = 0; i < n; ++i)
            p[i] = half * (2.0 * detail::halton(static_cast<unsigned long long>(k) + 1,
                                                kBases[i]) - 1.0);
        if (p.norm() <= 1.0) ++in_ball;
        if (p.norm() < 1e-12 || m.value(x, p) <= 1.0) ++in_body;
    }
    if (in_body == 0) throw NonFiniteEvaluation("bh_density: empty indicatrix estimate");
    return static_cast<double>(in_ball) / static_cast<double>(in_body);
}

/// Distortion tau(x, y) = ln( sqrt(|det g(x,y)|) / sigma(x) ).
inline double distortion(const MetricDescriptor& m, const MeasureDescriptor& mu, const Vec& x,
                         const Vec& y, const NumericsConfig& cfg = {}) {
    const TensorValue g = fundamental_tensor(m, x, y, cfg);
    const double sigma = mu.density(x);
    if (!(sigma > 0)) throw DomainViolation("distortion: measure density must be positive");
    return std::log(std::sqrt(std::abs(g.matrix.determinant())) / sigma);
}

/// S-curvature: derivative of the distortion along the geodesic through
/// (x, y), by a symmetric difference of two one-step geodesic probes.
inline double s_curvature(const MetricDescriptor& m, const MeasureDescriptor& mu, const Vec& x,
                          const Vec& y, const NumericsConfig& cfg = {}) {
    cfg.validate();
    const double h = cfg.ode_step;
    NumericsConfig probe = cfg;
    probe.ode_step = h;  // exactly one step per probe
    const GeodesicRecord fwd = integrate_geodesic(m, x, y, h, probe);
    const GeodesicRecord bwd = integrate_geodesic(m, x, y, -h, probe);
    const auto& pf = fwd.samples.back();
    const auto& pb = bwd.samples.back();
    const double tf = distortion(m, mu, pf.x, pf.v, cfg);
    const double tb = distortion(m, mu, pb.x, pb.v, cfg);
    return (tf - tb) / (2.0 * h);
}

/// div_mu X = (1/sigma) sum_i d_i(sigma X^i), second-order central stencil.
inline double divergence(const MeasureDescriptor& mu, const std::function<Vec(const Vec&)>& field,
                         const Vec& x, const NumericsConfig& cfg = {}) {
    cfg.validate();
    const double h = cfg.fd_step * (1.0 + x.norm());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec e = Vec::Zero(x.size());
        e[i] = h;
        const Vec xp = x + e, xm = x - e;
        acc += (mu.density(xp) * field(xp)[i] - mu.density(xm) * field(xm)[i]) / (2.0 * h);
    }
    return acc / mu.density(x);
}

/// Laplacian with respect to a smooth measure: div_mu of the gradient field.
/// The centre gradient seeds the stencil solves.
inline double laplacian_dmu(const MetricDescriptor& m, const MeasureDescriptor& mu,
                            const ScalarField& f, const Vec& x, const NumericsConfig& cfg = {}) {
    const Vec center = legendre_gradient(m, x, f.d(x, cfg), cfg);
    const auto grad = [&](const Vec& p) {
        return legendre_gradient(m, p, f.d(p, cfg), cfg, center);
    };
    return divergence(mu, grad, x, cfg);
}

/// Laplacian for the osculating measure sqrt(|det g(x, grad f(x))|)
/// evaluated pointwise across the stencil.
inline double laplacian_osculating(const MetricDescriptor& m, const ScalarField& f, const Vec& x,
                                   const NumericsConfig& cfg = {}) {
    const Vec center = legendre_gradient(m, x, f.d(x, cfg), cfg);
    const auto grad = [&](const Vec& p) {
        return legendre_gradient(m, p, f.d(p, cfg), cfg, center);
    };
    const MeasureDescriptor osc{
        [&](const Vec& p) {
            const TensorValue g = fundamental_tensor(m, p, grad(p), cfg);
            return std::sqrt(std::abs(g.matrix.determinant()));
        },
        "osculating"};
    return divergence(osc, grad, x, cfg);
}

}  // namespace finsler
