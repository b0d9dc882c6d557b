#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "finsler/calculus.hpp"
#include "finsler/flows.hpp"
#include "finsler/metric.hpp"
#include "finsler/navigation.hpp"
#include "finsler/numerics.hpp"
#include "finsler/report.hpp"

namespace finsler {

/// Sampling region: a patch around a base point intersected with an annulus
/// (the annulus keeps Funk-type metrics away from their singular sphere).
struct Region {
    Vec center;
    double patch_radius = 0.4;
    double r_min = 0.0;
    double r_max = 1e9;

    bool contains(const Vec& p) const {
        const double r = p.norm();
        return (p - center).norm() <= patch_radius && r > r_min && r < r_max;
    }
};

/// Points collected on one level set of a scalar field.
struct LevelSetSample {
    double level = 0.0;
    std::vector<Vec> points;
    const ScalarField* field = nullptr;
};

namespace detail {

inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Vec random_unit(int n, std::mt19937_64& rng) {
    // Box-Muller from the shared deterministic u01 stream.
    Vec v(n);
    for (int i = 0; i < n; ++i) {
        const double a = std::sqrt(-2.0 * std::log(u01(rng) + 1e-300));
        const double b = 2.0 * M_PI * u01(rng);
        v[i] = a * std::cos(b);
    }
    return v / v.norm();
}

inline Vec sample_region_point(const Region& reg, std::mt19937_64& rng) {
    const int n = static_cast<int>(reg.center.size());
    for (int tries = 0; tries < 1000; ++tries) {
        const Vec p = reg.center + u01(rng) * reg.patch_radius * random_unit(n, rng);
        if (reg.contains(p)) return p;
    }
    throw Error("sample_region_point: region appears empty");
}

/// Unit-F vector in the pre-cone at x whose navigation image clears the cone
/// margin: the linear pre-cone slack alone leaves shifted vectors inside the
/// excluded boundary band, so membership of the image is checked directly
/// (at twice the working margin, keeping downstream evaluations interior).
inline Vec sample_precone_unit(const NavigationDatum& d, const Vec& x, std::mt19937_64& rng,
                               const NumericsConfig& cfg) {
    const int n = d.base.dim;
    NumericsConfig strict = cfg;
    strict.cone_margin = 2.0 * cfg.cone_margin;
    for (int tries = 0; tries < 5000; ++tries) {
        Vec y = random_unit(n, rng);
        y /= d.base.value(x, y);
        if (!(inner(d.base, x, y, y, d.wind(x), cfg) < -1.0 - 10.0 * cfg.cone_margin)) continue;
        const Vec ytilde = y + d.wind(x);
        if (cone_membership(d, x, ytilde, strict)) return y;
    }
    throw Error("sample_precone_unit: could not hit the pre-cone");
}

}  // namespace detail

/// Shoot seeds from the region patch and project them onto f = level by a
/// 1-D Newton walk along the differential direction.
inline LevelSetSample sample_level(const ScalarField& f, double level, int count,
                                   const Region& region, std::mt19937_64& rng,
                                   const NumericsConfig& cfg = {}) {
    LevelSetSample out;
    out.level = level;
    out.field = &f;
    const int n = static_cast<int>(region.center.size());
    int attempts = 0;
    while (static_cast<int>(out.points.size()) < count && attempts < 200 * count) {
        ++attempts;
        Vec p = region.center +
                detail::u01(rng) * region.patch_radius * detail::random_unit(n, rng);
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            const double val = f(p);
            if (std::abs(val - level) <= 1e-11) {
                ok = true;
                break;
            }
            const Vec d = f.d(p, cfg);
            const double dd = d.squaredNorm();
            if (!(dd > 0) || !std::isfinite(dd)) break;
            p -= (val - level) / dd * d;
        }
        if (ok && region.contains(p)) out.points.push_back(p);
    }
    if (static_cast<int>(out.points.size()) < count)
        throw Error("sample_level: level " + std::to_string(level) +
                    " has too few points inside the region");
    return out;
}

namespace detail {

/// Per-level gradient norms F(x, grad f(x)) over sampled points.
inline std::vector<std::vector<double>> gradient_norms_per_level(
    const MetricDescriptor& m, const ScalarField& f, const std::vector<double>& levels,
    int samples_per_level, const Region& region, std::mt19937_64& rng,
    const NumericsConfig& cfg) {
    std::vector<std::vector<double>> out;
    for (double level : levels) {
        const LevelSetSample ls = sample_level(f, level, samples_per_level, region, rng, cfg);
        std::vector<double> norms;
        norms.reserve(ls.points.size());
        for (const Vec& p : ls.points) {
            const Vec g = legendre_gradient(m, p, f.d(p, cfg), cfg);
            norms.push_back(m.value(p, g));
        }
        out.push_back(std::move(norms));
    }
    return out;
}

inline double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace detail

/// Transnormality: the metric norm of the gradient must be constant on each
/// level set. Residual per level is the standard deviation across samples.
inline VerificationReport transnormal_residual(const MetricDescriptor& m, const ScalarField& f,
                                               const std::vector<double>& levels,
                                               int samples_per_level, const Region& region,
                                               std::mt19937_64& rng,
                                               const NumericsConfig& cfg = {}) {
    const auto norms = detail::gradient_norms_per_level(m, f, levels, samples_per_level,
                                                        region, rng, cfg);
    std::vector<double> deviations;
    long long total = 0;
    for (const auto& lv : norms) {
        deviations.push_back(detail::stddev(lv));
        total += static_cast<long long>(lv.size());
    }
    VerificationReport r = summarize("transnormal", deviations, 1e-5);
    r.n_samples = total;
    return r;
}

enum class LaplacianVariant { Measure, Osculating };

/// Isoparametric property: the chosen Laplacian must also be constant per
/// level. Requires transnormality first; the threshold is looser because two
/// layers of differencing are involved.
inline VerificationReport isoparametric_residual(const MetricDescriptor& m, const ScalarField& f,
                                                 const std::vector<double>& levels,
                                                 int samples_per_level, LaplacianVariant variant,
                                                 const MeasureDescriptor& mu, const Region& region,
                                                 std::mt19937_64& rng,
                                                 const NumericsConfig& cfg = {}) {
    {
        std::mt19937_64 pre_rng = rng;
        const VerificationReport pre =
            transnormal_residual(m, f, levels, samples_per_level, region, pre_rng, cfg);
        if (!pre.pass)
            throw HypothesisViolation("isoparametric_residual: field is not transnormal");
    }
    std::vector<double> deviations;
    long long total = 0;
    for (double level : levels) {
        const LevelSetSample ls = sample_level(f, level, samples_per_level, region, rng, cfg);
        std::vector<double> lap;
        lap.reserve(ls.points.size());
        for (const Vec& p : ls.points) {
            lap.push_back(variant == LaplacianVariant::Measure
                              ? laplacian_dmu(m, mu, f, p, cfg)
                              : laplacian_osculating(m, f, p, cfg));
        }
        deviations.push_back(detail::stddev(lap));
        total += static_cast<long long>(lap.size());
    }
    VerificationReport r = summarize(variant == LaplacianVariant::Measure
                                         ? "isoparametric-measure"
                                         : "isoparametric-osculating",
                                     deviations, 1e-3);
    r.n_samples = total;
    return r;
}

/**
 * Everything needed to transport a normalized isoparametric function through
 * a homothetic navigation: the datum, the induced Lorentz metric, the base
 * field f (normalized: f(x0) = 0, F(grad f) = 1), the flow, its dilation and
 * the measure (B.H. of the base metric). Constructed through make_context,
 * which checks the hypotheses.
 */
struct CorrespondenceContext {
    NavigationDatum datum;
    MetricDescriptor induced;
    ScalarField base_field;
    FlowMap psi;
    double c = 0.0;
    Vec x0;
    Region region;
    MeasureDescriptor mu;
};

inline CorrespondenceContext make_context(NavigationDatum datum, MetricDescriptor induced,
                                          ScalarField base_field, FlowMap psi, Vec x0,
                                          Region region, MeasureDescriptor mu,
                                          const NumericsConfig& cfg = {}) {
    cfg.validate();
    const double c = psi.dilation;
    CorrespondenceContext ctx{std::move(datum), std::move(induced), std::move(base_field),
                              std::move(psi), c, std::move(x0), std::move(region),
                              std::move(mu)};
    if (std::abs(ctx.base_field(ctx.x0)) > 1e-7)
        throw HypothesisViolation("make_context: base field is not zero at x0");
    // Probe normalization and the strong-wind pairing condition at x0 and a
    // few nearby points.
    std::vector<Vec> probes{ctx.x0};
    const int n = ctx.datum.base.dim;
    for (int i = 0; i < n; ++i) {
        for (double sgn : {1.0, -1.0}) {
            const Vec p = ctx.x0 + sgn * 0.25 * ctx.region.patch_radius * detail::axis(n, i);
            if (ctx.region.contains(p)) probes.push_back(p);
        }
    }
    for (const Vec& p : probes) {
        const Vec g = legendre_gradient(ctx.datum.base, p, ctx.base_field.d(p, cfg), cfg);
        if (std::abs(ctx.datum.base.value(p, g) - 1.0) > 1e-7)
            throw HypothesisViolation("make_context: base field is not normalized near x0");
        const double gv = inner(ctx.datum.base, p, g, g, ctx.datum.wind(p), cfg);
        if (!(gv < -1.0))
            throw HypothesisViolation(
                "make_context: <grad f, V>_grad f >= -1, the level map degenerates");
    }
    return ctx;
}

/// Signed Jacobian estimate of the glued level-set map at a zero-level
/// point: 1 + <grad f(x), V(x)>_{grad f}. The correspondence hypotheses
/// force it negative (the map reverses orientation).
inline double psi_levelmap_jacobian_sign(const CorrespondenceContext& ctx, const Vec& x,
                                         const NumericsConfig& cfg = {}) {
    if (std::abs(ctx.base_field(x)) > 1e-7)
        throw HypothesisViolation("psi_levelmap_jacobian_sign: point is not on the zero level");
    const Vec g = legendre_gradient(ctx.datum.base, x, ctx.base_field.d(x, cfg), cfg);
    const double det = 1.0 + inner(ctx.datum.base, x, g, g, ctx.datum.wind(x), cfg);
    if (det >= 0.0)
        throw HypothesisViolation("psi_levelmap_jacobian_sign: level map fails to reverse orientation");
    return det;
}

/**
 * The transported function at x_tilde: the parameter t solving
 * f(psi_{-t}(x_tilde)) = reparam(c, t). The bracket is scanned outward from
 * t = 0 (64 subdivisions of [-2, 2]); sides where the flow escapes are
 * truncated. Refined by bisection.
 */
inline double correspond_value(const CorrespondenceContext& ctx, const Vec& x_tilde,
                               const NumericsConfig& cfg = {}) {
    const double t_max = 2.0;
    const int half_grid = 32;
    const auto h = [&](double t) {
        return ctx.base_field(ctx.psi.apply(-t, x_tilde)) - reparam(ctx.c, t);
    };
    const double h0 = h(0.0);
    if (h0 == 0.0) return 0.0;

    double lo = 0.0, hi = 0.0;
    bool bracketed = false;
    double scanned_lo = 0.0, scanned_hi = 0.0;
    for (double sgn : {1.0, -1.0}) {
        double prev_t = 0.0, prev_h = h0;
        for (int k = 1; k <= half_grid; ++k) {
            const double t = sgn * t_max * k / half_grid;
            double ht;
            try {
                ht = h(t);
            } catch (const FlowEscape&) {
                break;
            }
            if (sgn > 0)
                scanned_hi = t;
            else
                scanned_lo = t;
            if (prev_h * ht <= 0.0) {
                lo = std::min(prev_t, t);
                hi = std::max(prev_t, t);
                bracketed = true;
                break;
            }
            prev_t = t;
            prev_h = ht;
        }
        if (bracketed) break;
    }
    if (!bracketed)
        throw RootNotBracketed(scanned_lo, scanned_hi,
                               "correspond_value: no level-map root in the scanned interval");
    double hlo = h(lo);
    const double width_tol = std::max(1e-14, 0.01 * cfg.newton_tol);
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double hm = h(mid);
        if (hm == 0.0 || hi - lo <= width_tol * (1.0 + std::abs(mid))) return mid;
        if (hlo * hm <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            hlo = hm;
        }
    }
    return 0.5 * (lo + hi);
}

/// The transported function as a ScalarField. The differential is the exact
/// implicit derivative of the root equation, so downstream Laplacians only
/// pay one layer of differencing. The field borrows ctx, which must outlive it.
inline ScalarField induced_field(const CorrespondenceContext& ctx,
                                 const NumericsConfig& cfg = {}) {
    const CorrespondenceContext* c = &ctx;
    NumericsConfig cc = cfg;
    return {[c, cc](const Vec& p) { return correspond_value(*c, p, cc); },
            [c, cc](const Vec& p) {
                const double t = correspond_value(*c, p, cc);
                const Vec q = c->psi.apply(-t, p);
                const Vec dfq = c->base_field.d(q, cc);
                const double denom =
                    dfq.dot(c->datum.wind(q)) + std::exp(2.0 * c->c * t);
                const int n = static_cast<int>(p.size());
                Vec row(n);
                for (int j = 0; j < n; ++j)
                    row[j] = dfq.dot(c->psi.tangent(-t, p, detail::axis(n, j)));
                return Vec(row / denom);
            }};
}

namespace detail {

inline void require_on_level(const CorrespondenceContext& ctx, const Vec& x, double t) {
    if (std::abs(ctx.base_field(x) - reparam(ctx.c, t)) > 1e-8)
        throw HypothesisViolation("correspondence: x does not lie on the matching base level");
}

}  // namespace detail

/// Residual of the gradient transport law: the independently solved Lorentz
/// gradient of the transported field against the pushed base gradient
/// (2 c f + 1) grad f carried through the glued level map.
inline double verify_gradient_correspondence(const CorrespondenceContext& ctx, const Vec& x,
                                             double t, const NumericsConfig& cfg = {}) {
    detail::require_on_level(ctx, x, t);
    const Vec xt = ctx.psi.apply(t, x);
    const ScalarField ft = induced_field(ctx, cfg);
    const Vec lhs = legendre_gradient(ctx.induced, xt, ft.d(xt, cfg), cfg);
    const Vec g = legendre_gradient(ctx.datum.base, x, ctx.base_field.d(x, cfg), cfg);
    const double scale = 2.0 * ctx.c * ctx.base_field(x) + 1.0;
    const Vec rhs = ctx.psi.tangent(t, x, scale * g) + ctx.datum.wind(xt);
    return (lhs - rhs).norm();
}

/// Residual of the measure-Laplacian transport law
/// (2 c f + 1) Lap_mu f - 2 c n against the transported field's Laplacian.
inline double verify_laplacian_relation_dmu(const CorrespondenceContext& ctx, const Vec& x,
                                            double t, const NumericsConfig& cfg = {}) {
    detail::require_on_level(ctx, x, t);
    const Vec xt = ctx.psi.apply(t, x);
    const ScalarField ft = induced_field(ctx, cfg);
    const double lhs = laplacian_dmu(ctx.induced, ctx.mu, ft, xt, cfg);
    const double scale = 2.0 * ctx.c * ctx.base_field(x) + 1.0;
    const double rhs = scale * laplacian_dmu(ctx.datum.base, ctx.mu, ctx.base_field, x, cfg) -
                       2.0 * ctx.c * ctx.datum.base.dim;
    return std::abs(lhs - rhs);
}

/// Same with osculating Laplacians: (2 c f + 1) Lap f - (n - 1) c.
inline double verify_laplacian_relation_osc(const CorrespondenceContext& ctx, const Vec& x,
                                            double t, const NumericsConfig& cfg = {}) {
    detail::require_on_level(ctx, x, t);
    const Vec xt = ctx.psi.apply(t, x);
    const ScalarField ft = induced_field(ctx, cfg);
    const double lhs = laplacian_osculating(ctx.induced, ft, xt, cfg);
    const double scale = 2.0 * ctx.c * ctx.base_field(x) + 1.0;
    const double rhs = scale * laplacian_osculating(ctx.datum.base, ctx.base_field, x, cfg) -
                       (ctx.datum.base.dim - 1) * ctx.c;
    return std::abs(lhs - rhs);
}

/// The composite end-to-end check: the transported field is transnormal with
/// unit gradient norm, isoparametric in both variants, and fixes the zero
/// level pointwise.
inline std::vector<VerificationReport> verify_correspondence(const CorrespondenceContext& ctx,
                                                      const std::vector<double>& levels,
                                                      int samples_per_level,
                                                      std::mt19937_64& rng,
                                                      const NumericsConfig& cfg = {}) {
    std::vector<VerificationReport> reports;
    const ScalarField ft = induced_field(ctx, cfg);

    const auto norms = detail::gradient_norms_per_level(ctx.induced, ft, levels,
                                                        samples_per_level, ctx.region, rng, cfg);
    std::vector<double> deviations, norm_errors;
    long long total = 0;
    for (const auto& lv : norms) {
        deviations.push_back(detail::stddev(lv));
        total += static_cast<long long>(lv.size());
        for (double f : lv) norm_errors.push_back(std::abs(f - 1.0));
    }
    VerificationReport trans = summarize("transnormal", deviations, 1e-5);
    trans.n_samples = total;
    reports.push_back(trans);
    reports.push_back(summarize("normalization", norm_errors, 1e-5));

    reports.push_back(isoparametric_residual(ctx.induced, ft, levels, samples_per_level,
                                             LaplacianVariant::Measure, ctx.mu, ctx.region, rng,
                                             cfg));
    reports.push_back(isoparametric_residual(ctx.induced, ft, levels, samples_per_level,
                                             LaplacianVariant::Osculating, ctx.mu, ctx.region,
                                             rng, cfg));

    const LevelSetSample zero =
        sample_level(ctx.base_field, 0.0, samples_per_level, ctx.region, rng, cfg);
    std::vector<double> zero_res;
    for (const Vec& p : zero.points) zero_res.push_back(std::abs(ft(p)));
    reports.push_back(summarize("zero-level", zero_res, 1e-8));
    return reports;
}

}  // namespace finsler
