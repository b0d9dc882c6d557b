#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "finsler/finsler.hpp"

namespace finsler {

struct ConfigError : Error { using Error::Error; };

/// A declarative scenario: which metric, wind and field to build, which
/// identities to check, and where outputs go. Loaded from versioned JSON.
struct ScenarioConfig {
    std::string name = "scenario";
    int dim = 2;
    std::string metric_name = "lorentz-funk";
    std::string base_metric_name = "euclidean";
    std::string wind_kind = "radial";  // constant | linear | radial | quadratic-x1 | none
    Vec wind_constant;
    Mat wind_linear;
    std::optional<double> dilation;
    std::string field_name = "sphere";  // sphere | hyperplane | affine | bilinear | none
    double field_a = 2.0;
    Vec field_w;
    double field_b = 0.0;
    Vec x0;
    double patch_radius = 0.4;
    double r_min = 1.2;
    double r_max = 5.0;
    std::vector<double> levels{-0.2, 0.0, 0.2};
    int samples = 50;
    std::uint64_t seed = 1;
    std::vector<std::string> checks;
    Vec geo_x0;
    Vec geo_y0;
    double geo_horizon = 0.5;
    std::string out_report = "report.json";
    std::string out_trajectory = "trajectory.csv";
    std::string out_levelset = "levelset.csv";
    NumericsConfig numerics;

    static ScenarioConfig parse(const nlohmann::json& j);
    static ScenarioConfig load(const std::string& path);
};

namespace detail {

inline Vec json_vec(const nlohmann::json& j, const char* key) {
    if (!j.is_array()) throw ConfigError(std::string("config: ") + key + " must be an array");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(std::string("config: ") + key + " must be numeric");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline Mat json_mat(const nlohmann::json& j, const char* key) {
    if (!j.is_array() || j.empty())
        throw ConfigError(std::string("config: ") + key + " must be a matrix");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    Mat m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ConfigError(std::string("config: ") + key + " rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return m;
}

}  // namespace detail

/// Everything a check needs, built once per run from the config.
struct ScenarioContext {
    ScenarioConfig config;
    MetricDescriptor base;
    MetricDescriptor metric;  // the scenario metric (the induced one for Lorentz scenarios)
    std::optional<VectorFieldSpec> wind;
    std::optional<NavigationDatum> datum;
    std::optional<FlowMap> psi;
    std::optional<ScalarField> field;
    std::optional<CorrespondenceContext> corr;
    MeasureDescriptor mu = measure_lebesgue();
    Region region;
    std::mt19937_64 rng{1};
    NumericsConfig num;
};

inline const std::vector<std::string>& known_metric_names() {
    static const std::vector<std::string> names{"euclidean", "minkowski-quartic", "randers",
                                                "lorentz-funk", "navigation"};
    return names;
}

inline const std::vector<std::string>& known_wind_kinds() {
    static const std::vector<std::string> names{"constant", "linear", "radial", "quadratic-x1",
                                                "none"};
    return names;
}

inline const std::vector<std::string>& known_field_names() {
    static const std::vector<std::string> names{"sphere", "hyperplane", "affine", "bilinear",
                                                "none"};
    return names;
}

inline std::vector<std::string> known_check_names();

inline ScenarioConfig ScenarioConfig::parse(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    if (j.value("schema", "") != std::string("scenario/1"))
        throw ConfigError("config: missing or unsupported schema (want \"scenario/1\")");
    ScenarioConfig c;
    c.name = j.value("name", c.name);
    c.dim = j.value("dim", c.dim);
    if (c.dim < 2) throw ConfigError("config: dim must be >= 2");

    if (j.contains("metric")) c.metric_name = j.at("metric").value("name", c.metric_name);
    if (j.contains("base_metric"))
        c.base_metric_name = j.at("base_metric").value("name", c.base_metric_name);
    for (const auto* nm : {&c.metric_name, &c.base_metric_name}) {
        const auto& list = known_metric_names();
        if (std::find(list.begin(), list.end(), *nm) == list.end())
            throw ConfigError("config: unknown metric name \"" + *nm + "\"");
    }

    if (j.contains("wind")) {
        const auto& w = j.at("wind");
        c.wind_kind = w.value("kind", c.wind_kind);
        if (w.contains("v")) c.wind_constant = detail::json_vec(w.at("v"), "wind.v");
        if (w.contains("a")) c.wind_linear = detail::json_mat(w.at("a"), "wind.a");
    }
    {
        const auto& list = known_wind_kinds();
        if (std::find(list.begin(), list.end(), c.wind_kind) == list.end())
            throw ConfigError("config: unknown wind kind \"" + c.wind_kind + "\"");
    }
    if (j.contains("dilation")) c.dilation = j.at("dilation").get<double>();

    if (j.contains("field")) {
        const auto& f = j.at("field");
        c.field_name = f.value("name", c.field_name);
        c.field_a = f.value("a", c.field_a);
        c.field_b = f.value("b", c.field_b);
        if (f.contains("w")) c.field_w = detail::json_vec(f.at("w"), "field.w");
    }
    {
        const auto& list = known_field_names();
        if (std::find(list.begin(), list.end(), c.field_name) == list.end())
            throw ConfigError("config: unknown field name \"" + c.field_name + "\"");
    }

    if (j.contains("x0")) c.x0 = detail::json_vec(j.at("x0"), "x0");
    if (j.contains("region")) {
        const auto& r = j.at("region");
        c.patch_radius = r.value("patch_radius", c.patch_radius);
        c.r_min = r.value("r_min", c.r_min);
        c.r_max = r.value("r_max", c.r_max);
    }
    if (j.contains("levels")) {
        c.levels.clear();
        for (const auto& v : j.at("levels")) c.levels.push_back(v.get<double>());
    }
    c.samples = j.value("samples", c.samples);
    c.seed = j.value("seed", c.seed);
    if (j.contains("checks")) {
        c.checks.clear();
        for (const auto& v : j.at("checks")) c.checks.push_back(v.get<std::string>());
        const auto names = known_check_names();
        for (const auto& chk : c.checks)
            if (std::find(names.begin(), names.end(), chk) == names.end())
                throw ConfigError("config: unknown check \"" + chk + "\"");
    }
    if (j.contains("geodesic")) {
        const auto& g = j.at("geodesic");
        if (g.contains("x0")) c.geo_x0 = detail::json_vec(g.at("x0"), "geodesic.x0");
        if (g.contains("y0")) c.geo_y0 = detail::json_vec(g.at("y0"), "geodesic.y0");
        c.geo_horizon = g.value("horizon", c.geo_horizon);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        c.out_report = o.value("report", c.out_report);
        c.out_trajectory = o.value("trajectory", c.out_trajectory);
        c.out_levelset = o.value("levelset", c.out_levelset);
    }
    if (j.contains("numerics")) {
        const auto& n = j.at("numerics");
        c.numerics.fd_step = n.value("fd_step", c.numerics.fd_step);
        c.numerics.newton_tol = n.value("newton_tol", c.numerics.newton_tol);
        c.numerics.newton_max_iter = n.value("newton_max_iter", c.numerics.newton_max_iter);
        c.numerics.ode_step = n.value("ode_step", c.numerics.ode_step);
        c.numerics.quad_samples = n.value("quad_samples", c.numerics.quad_samples);
        c.numerics.cone_margin = n.value("cone_margin", c.numerics.cone_margin);
    }
    try {
        c.numerics.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.x0.size() == 0) {
        c.x0 = Vec::Zero(c.dim);
        c.x0[0] = 2.0;
    }
    if (c.geo_x0.size() == 0) c.geo_x0 = c.x0;
    if (c.geo_y0.size() == 0) {
        c.geo_y0 = Vec::Zero(c.dim);
        c.geo_y0[0] = -1.0;
    }
    return c;
}

inline ScenarioConfig ScenarioConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    return parse(j);
}

namespace detail {

inline MetricDescriptor make_base_metric(const ScenarioConfig& c) {
    if (c.base_metric_name == "euclidean") return euclidean(c.dim);
    if (c.base_metric_name == "minkowski-quartic") return minkowski_quartic(c.dim);
    throw ConfigError("config: base metric must be positive definite and x-independent");
}

inline std::optional<VectorFieldSpec> make_wind(const ScenarioConfig& c) {
    if (c.wind_kind == "none") return std::nullopt;
    if (c.wind_kind == "radial") return VectorFieldSpec::radial_negative(c.dim);
    if (c.wind_kind == "constant") {
        if (c.wind_constant.size() != c.dim)
            throw ConfigError("config: wind.v must have length dim");
        return VectorFieldSpec::constant(c.wind_constant);
    }
    if (c.wind_kind == "linear") {
        if (c.wind_linear.rows() != c.dim || c.wind_linear.cols() != c.dim)
            throw ConfigError("config: wind.a must be dim x dim");
        return VectorFieldSpec::linear(c.wind_linear);
    }
    if (c.wind_kind == "quadratic-x1") {
        const int n = c.dim;
        return VectorFieldSpec::analytic(n, [n](const DVec& x) {
            DVec r(static_cast<std::size_t>(n), Dual2(0.0));
            r[0] = -(x[0] * x[0]);
            return r;
        });
    }
    throw ConfigError("config: unknown wind kind");
}

inline std::optional<ScalarField> make_field(const ScenarioConfig& c) {
    if (c.field_name == "none") return std::nullopt;
    if (c.field_name == "sphere") return sphere_field(c.field_a);
    if (c.field_name == "hyperplane") return hyperplane_field(c.field_a);
    if (c.field_name == "bilinear") return bilinear_field();
    if (c.field_name == "affine") {
        if (c.field_w.size() != c.dim) throw ConfigError("config: field.w must have length dim");
        return affine_field(c.field_w, c.field_b);
    }
    throw ConfigError("config: unknown field name");
}

}  // namespace detail

/// Build the working objects for a scenario. The measure is the B.H. measure
/// of the base metric (exactly 1 for the Euclidean base, a constant computed
/// by quadrature for Minkowski bases).
inline ScenarioContext build_context(const ScenarioConfig& c) {
    ScenarioContext ctx;
    ctx.config = c;
    ctx.num = c.numerics;
    ctx.rng.seed(c.seed);
    ctx.base = detail::make_base_metric(c);
    ctx.wind = detail::make_wind(c);
    ctx.region = Region{c.x0, c.patch_radius, c.r_min, c.r_max};

    if (c.metric_name == "euclidean") {
        ctx.metric = euclidean(c.dim);
    } else if (c.metric_name == "minkowski-quartic") {
        ctx.metric = minkowski_quartic(c.dim);
    } else if (c.metric_name == "randers") {
        if (!ctx.wind) throw ConfigError("config: randers needs a wind");
        ctx.metric = randers_navigation(c.dim, *ctx.wind);
    } else if (c.metric_name == "lorentz-funk") {
        ctx.metric = lorentz_funk(c.dim, ctx.num);
        if (!ctx.wind) ctx.wind = VectorFieldSpec::radial_negative(c.dim);
    } else {  // navigation
        if (!ctx.wind) throw ConfigError("config: navigation needs a wind");
        ctx.metric = navigation_induced(ctx.base, *ctx.wind, ctx.num);
    }

    if (ctx.base.name == "euclidean") {
        ctx.mu = measure_lebesgue();
    } else {
        ctx.mu = measure_constant(bh_density(ctx.base, c.x0, ctx.num), "bh-" + ctx.base.name);
    }

    if (ctx.wind) {
        ctx.datum = NavigationDatum{ctx.base, *ctx.wind, c.dilation};
        ctx.psi = flow(*ctx.wind, ctx.num, c.dilation);
    }
    ctx.field = detail::make_field(c);
    if (ctx.field && ctx.datum && ctx.metric.kind == MetricKind::LorentzCone) {
        ctx.corr = make_context(*ctx.datum, ctx.metric, *ctx.field, *ctx.psi, c.x0, ctx.region,
                                ctx.mu, ctx.num);
    }
    return ctx;
}

// ---------------------------------------------------------------------------
// Sampling helpers shared by the checks.
// ---------------------------------------------------------------------------

// ---------------------------------------------------------------------------
// Check registry. Tolerances are fixed here, not configurable.
// ---------------------------------------------------------------------------

using CheckFn = std::function<std::vector<VerificationReport>(ScenarioContext&)>;

inline std::vector<VerificationReport> check_navigation_consistency(ScenarioContext& ctx) {
    if (!ctx.datum) throw ConfigError("navigation-consistency requires a wind");
    std::vector<double> transport, roundtrip;
    for (int k = 0; k < 500; ++k) {
        const Vec x = detail::sample_region_point(ctx.region, ctx.rng);
        const Vec y = detail::sample_precone_unit(*ctx.datum, x, ctx.rng, ctx.num);
        const double f = ctx.datum->base.value(x, y);
        const Vec yt = forward_map(*ctx.datum, x, y, ctx.num);
        transport.push_back(std::abs(ctx.metric.value(x, yt) - f) / f);
        const Vec back = inverse_map(*ctx.datum, x, yt, ctx.num);
        roundtrip.push_back((back - y).norm() / y.norm());
    }
    return {summarize("navigation-consistency", transport, 1e-9),
            summarize("navigation-inverse", roundtrip, 1e-9)};
}

inline std::vector<VerificationReport> check_closed_form_agreement(ScenarioContext& ctx) {
    if (!ctx.datum || ctx.datum->base.name != "euclidean" ||
        ctx.datum->wind.kind != VectorFieldSpec::Kind::RadialNegative)
        throw ConfigError("closed-form-agreement requires the Euclidean radial datum");
    const int n = ctx.config.dim;
    const MetricDescriptor closed = lorentz_funk(n, ctx.num);
    const MetricDescriptor generic = navigation_induced(ctx.datum->base, ctx.datum->wind, ctx.num);
    std::vector<double> value_res, tensor_res;
    for (double r : {1.2, 1.6, 2.0, 2.8, 4.0}) {
        for (int k = 0; k < 8; ++k) {
            const Vec dir = detail::random_unit(n, ctx.rng);
            const Vec x = r * dir;
            const Vec y = detail::sample_precone_unit(*ctx.datum, x, ctx.rng, ctx.num);
            const Vec yt = forward_map(*ctx.datum, x, y, ctx.num);
            value_res.push_back(std::abs(closed.value(x, yt) - generic.value(x, yt)));
            const Mat ga = fundamental_tensor(closed, x, yt, ctx.num).matrix;
            const Mat gb = fundamental_tensor(generic, x, yt, ctx.num).matrix;
            tensor_res.push_back((ga - gb).cwiseAbs().maxCoeff());
        }
    }
    return {summarize("closed-form-value", value_res, 1e-7),
            summarize("closed-form-tensor", tensor_res, 1e-6)};
}

inline std::vector<VerificationReport> check_signature(ScenarioContext& ctx) {
    std::vector<double> failures;
    const int expected_neg = ctx.metric.kind == MetricKind::LorentzCone ? ctx.config.dim - 1 : 0;
    for (int k = 0; k < 500; ++k) {
        const Vec x = detail::sample_region_point(ctx.region, ctx.rng);
        Vec y;
        if (ctx.datum && ctx.metric.kind == MetricKind::LorentzCone) {
            y = forward_map(*ctx.datum, x,
                            detail::sample_precone_unit(*ctx.datum, x, ctx.rng, ctx.num), ctx.num);
        } else {
            y = detail::random_unit(ctx.config.dim, ctx.rng);
        }
        const auto [pos, neg] = signature(ctx.metric, x, y, ctx.num);
        failures.push_back(
            (pos == ctx.config.dim - expected_neg && neg == expected_neg) ? 0.0 : 1.0);
    }
    return {summarize("signature", failures, 0.5)};
}

inline std::vector<VerificationReport> check_tensor_relation(ScenarioContext& ctx) {
    if (!ctx.datum) throw ConfigError("tensor-relation requires a wind");
    std::vector<double> res;
    for (int k = 0; k < 200; ++k) {
        const Vec x = detail::sample_region_point(ctx.region, ctx.rng);
        const Vec y = detail::sample_precone_unit(*ctx.datum, x, ctx.rng, ctx.num);
        res.push_back(tensor_relation_residual(*ctx.datum, ctx.metric, x, y, ctx.num));
    }
    return {summarize("tensor-relation", res, 1e-6)};
}

inline std::vector<VerificationReport> check_geodesic_correspondence(ScenarioContext& ctx) {
    if (!ctx.datum || !ctx.psi)
        throw ConfigError("geodesic-correspondence requires a wind with a dilation");
    const ScenarioConfig& c = ctx.config;
    const double T = c.geo_horizon;

    // Reference: the base geodesic pushed through the flow.
    const double s_max = std::max(reparam(ctx.psi->dilation, T), T) + 0.05;
    const Vec y0n = c.geo_y0 / ctx.metric.value(c.geo_x0, c.geo_y0);
    const Vec ybase = inverse_map(*ctx.datum, c.geo_x0, y0n, ctx.num);
    const GeodesicRecord base_geo =
        integrate_geodesic(ctx.datum->base, c.geo_x0, ybase, s_max, ctx.num);
    const GeodesicRecord ref = navigated_geodesic(*ctx.datum, *ctx.psi, base_geo, T, ctx.num);

    const auto sup_error = [&](double step) {
        NumericsConfig ncfg = ctx.num;
        ncfg.ode_step = step;
        const GeodesicRecord got = integrate_geodesic(ctx.metric, c.geo_x0, y0n, T, ncfg);
        double worst = 0.0;
        for (const auto& s : got.samples) {
            const auto [rx, rv] = interpolate(ref, s.t);
            worst = std::max(worst, (s.x - rx).norm());
        }
        return worst;
    };

    std::vector<double> sup{sup_error(ctx.num.ode_step)};
    const double e1 = sup_error(0.025), e2 = sup_error(0.0125);
    const double ratio = e1 / std::max(e2, 1e-300);
    const double ratio_res = std::max({0.0, 12.0 - ratio, ratio - 20.0});
    std::vector<VerificationReport> out{summarize("geodesic-correspondence", sup, 1e-5),
                                        summarize("geodesic-order", {ratio_res}, 1e-9)};
    out[1].mean_residual = ratio;  // informational: the measured convergence ratio
    return out;
}

inline std::vector<VerificationReport> check_homothety(ScenarioContext& ctx) {
    if (!ctx.psi) throw ConfigError("homothety requires a wind");
    const double cdil = ctx.psi->dilation;
    std::vector<double> metric_res, tensor_res;
    for (int k = 0; k < 60; ++k) {
        const Vec x = detail::sample_region_point(ctx.region, ctx.rng);
        const Vec y = detail::random_unit(ctx.config.dim, ctx.rng);
        const double t = -0.4 + 0.8 * detail::u01(ctx.rng);
        const Vec xt = ctx.psi->apply(t, x);
        const Vec yt = ctx.psi->tangent(t, x, y);
        const double f0 = ctx.base.value(x, y);
        metric_res.push_back(
            std::abs(ctx.base.value(xt, yt) - std::exp(-2.0 * cdil * t) * f0) / f0);
        const Vec u = detail::random_unit(ctx.config.dim, ctx.rng);
        const Vec v = detail::random_unit(ctx.config.dim, ctx.rng);
        const double lhs = inner(ctx.base, xt, yt, ctx.psi->tangent(t, x, u),
                                 ctx.psi->tangent(t, x, v), ctx.num);
        const double rhs = std::exp(-4.0 * cdil * t) * inner(ctx.base, x, y, u, v, ctx.num);
        tensor_res.push_back(std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
    }

    // Restriction to a unit-speed base geodesic.
    std::vector<double> restriction_res;
    for (int k = 0; k < 10; ++k) {
        const Vec x = detail::sample_region_point(ctx.region, ctx.rng);
        Vec y = detail::random_unit(ctx.config.dim, ctx.rng);
        y /= ctx.base.value(x, y);
        const GeodesicRecord geo = integrate_geodesic(ctx.base, x, y, 0.3, ctx.num);
        restriction_res.push_back(
            restriction_identity_residual(ctx.base, ctx.psi->generator, cdil, geo, ctx.num));
    }
    return {summarize("homothety-metric", metric_res, 1e-7),
            summarize("homothety-restriction", restriction_res, 1e-9),
            summarize("homothety-tensor", tensor_res, 1e-6)};
}

inline std::vector<VerificationReport> check_s_curvature_shift(ScenarioContext& ctx) {
    if (!ctx.datum || !ctx.psi) throw ConfigError("s-curvature-shift requires a wind");
    const double cdil = ctx.psi->dilation;
    const int n = ctx.config.dim;
    std::vector<double> shift_res, invariance_res;
    for (int k = 0; k < 100; ++k) {
        const Vec x = detail::sample_region_point(ctx.region, ctx.rng);
        const Vec y = detail::sample_precone_unit(*ctx.datum, x, ctx.rng, ctx.num);
        const Vec yt = forward_map(*ctx.datum, x, y, ctx.num);
        const double s_base = s_curvature(ctx.base, ctx.mu, x, y, ctx.num);
        const double s_ind = s_curvature(ctx.metric, ctx.mu, x, yt, ctx.num);
        shift_res.push_back(std::abs(s_ind - (s_base + (n + 1) * cdil)));
        if (k < 25) {
            const double t = -0.3 + 0.6 * detail::u01(ctx.rng);
            const Vec xt = ctx.psi->apply(t, x);
            const Vec ytan = ctx.psi->tangent(t, x, y);
            invariance_res.push_back(
                std::abs(s_curvature(ctx.base, ctx.mu, xt, ytan, ctx.num) - s_base));
        }
    }
    return {summarize("s-curvature-shift", shift_res, 1e-3),
            summarize("s-curvature-invariance", invariance_res, 1e-5)};
}

inline std::vector<VerificationReport> check_laplacian_s_relation(ScenarioContext& ctx) {
    if (!ctx.corr) throw ConfigError("laplacian-s-relation requires a correspondence context");
    const CorrespondenceContext& corr = *ctx.corr;
    std::vector<double> base_res, lorentz_res;
    const ScalarField ft = induced_field(corr, ctx.num);
    for (double level : ctx.config.levels) {
        const LevelSetSample base_ls =
            sample_level(corr.base_field, level, 17, ctx.region, ctx.rng, ctx.num);
        for (const Vec& p : base_ls.points) {
            const Vec g = legendre_gradient(corr.datum.base, p, corr.base_field.d(p, ctx.num),
                                            ctx.num);
            const double lhs = laplacian_osculating(corr.datum.base, corr.base_field, p, ctx.num);
            const double rhs = laplacian_dmu(corr.datum.base, corr.mu, corr.base_field, p,
                                             ctx.num) +
                               s_curvature(corr.datum.base, corr.mu, p, g, ctx.num);
            base_res.push_back(std::abs(lhs - rhs));
        }
        const LevelSetSample ind_ls = sample_level(ft, level, 17, ctx.region, ctx.rng, ctx.num);
        for (const Vec& p : ind_ls.points) {
            const Vec g = legendre_gradient(corr.induced, p, ft.d(p, ctx.num), ctx.num);
            const double lhs = laplacian_osculating(corr.induced, ft, p, ctx.num);
            const double rhs = laplacian_dmu(corr.induced, corr.mu, ft, p, ctx.num) +
                               s_curvature(corr.induced, corr.mu, p, g, ctx.num);
            lorentz_res.push_back(std::abs(lhs - rhs));
        }
    }
    return {summarize("laplacian-s-relation-base", base_res, 1e-4),
            summarize("laplacian-s-relation-lorentz", lorentz_res, 1e-4)};
}

inline std::vector<VerificationReport> check_gradient_correspondence(ScenarioContext& ctx) {
    if (!ctx.corr) throw ConfigError("gradient-correspondence requires a correspondence context");
    std::vector<double> res;
    for (int k = 0; k < 40; ++k) {
        const double t = -0.25 + 0.5 * detail::u01(ctx.rng);
        const LevelSetSample ls = sample_level(ctx.corr->base_field, reparam(ctx.corr->c, t), 1,
                                               ctx.region, ctx.rng, ctx.num);
        res.push_back(verify_gradient_correspondence(*ctx.corr, ls.points[0], t, ctx.num));
    }
    return {summarize("gradient-correspondence", res, 1e-5)};
}

inline std::vector<VerificationReport> check_laplacian_correspondence(ScenarioContext& ctx) {
    if (!ctx.corr) throw ConfigError("laplacian-correspondence requires a correspondence context");
    std::vector<double> dmu_res, osc_res;
    for (int k = 0; k < 50; ++k) {
        const double t = -0.25 + 0.5 * detail::u01(ctx.rng);
        const LevelSetSample ls = sample_level(ctx.corr->base_field, reparam(ctx.corr->c, t), 1,
                                               ctx.region, ctx.rng, ctx.num);
        dmu_res.push_back(verify_laplacian_relation_dmu(*ctx.corr, ls.points[0], t, ctx.num));
        osc_res.push_back(verify_laplacian_relation_osc(*ctx.corr, ls.points[0], t, ctx.num));
    }
    return {summarize("laplacian-correspondence-measure", dmu_res, 1e-3),
            summarize("laplacian-correspondence-osculating", osc_res, 1e-3)};
}

inline std::vector<VerificationReport> check_correspondence(ScenarioContext& ctx) {
    if (!ctx.corr) throw ConfigError("correspondence requires a correspondence context");
    auto reports = verify_correspondence(*ctx.corr, ctx.config.levels,
                                  std::max(5, ctx.config.samples / 5), ctx.rng, ctx.num);

    // When the transported field has a known closed form, pin it.
    const bool funk_datum = ctx.corr->datum.base.name == "euclidean" &&
                            ctx.corr->datum.wind.kind == VectorFieldSpec::Kind::RadialNegative;
    if (funk_datum &&
        (ctx.config.field_name == "sphere" || ctx.config.field_name == "hyperplane")) {
        const ScalarField expect = ctx.config.field_name == "sphere"
                                       ? funk_sphere_field(ctx.config.field_a)
                                       : funk_hyperplane_field(ctx.config.field_a);
        const ScalarField ft = induced_field(*ctx.corr, ctx.num);
        std::vector<double> res;
        for (int k = 0; k < 200; ++k) {
            const Vec p = detail::sample_region_point(ctx.region, ctx.rng);
            res.push_back(std::abs(ft(p) - expect(p)));
        }
        reports.push_back(summarize("closed-form-match", res, 1e-6));
    }
    return reports;
}

inline std::vector<VerificationReport> check_bh_density(ScenarioContext& ctx) {
    std::vector<VerificationReport> out;
    const Vec origin = Vec::Zero(ctx.config.dim);
    {
        const double sigma = bh_density(euclidean(ctx.config.dim), origin, ctx.num);
        out.push_back(summarize("bh-density-euclidean", {std::abs(sigma - 1.0)}, 1e-15));
    }
    if (ctx.config.dim == 2) {
        const double vol = std::pow(2.0 * std::tgamma(1.25), 2.0) / std::tgamma(1.5);
        const double expected = M_PI / vol;
        const double sigma = bh_density(minkowski_quartic(2), origin, ctx.num);
        out.push_back(
            summarize("bh-density-quartic", {std::abs(sigma - expected) / expected}, 1e-2));
    }
    {
        Vec v = Vec::Zero(ctx.config.dim);
        v[0] = 0.5;
        const double sigma =
            bh_density(randers_navigation(ctx.config.dim, VectorFieldSpec::constant(v)), origin,
                       ctx.num);
        out.push_back(summarize("bh-density-randers", {std::abs(sigma - 1.0)}, 1e-2));
    }
    return out;
}

inline const std::map<std::string, CheckFn>& check_registry() {
    static const std::map<std::string, CheckFn> reg{
        {"navigation-consistency", check_navigation_consistency},
        {"closed-form-agreement", check_closed_form_agreement},
        {"signature", check_signature},
        {"tensor-relation", check_tensor_relation},
        {"geodesic-correspondence", check_geodesic_correspondence},
        {"homothety", check_homothety},
        {"s-curvature-shift", check_s_curvature_shift},
        {"laplacian-s-relation", check_laplacian_s_relation},
        {"gradient-correspondence", check_gradient_correspondence},
        {"laplacian-correspondence", check_laplacian_correspondence},
        {"correspondence", check_correspondence},
        {"bh-density", check_bh_density},
    };
    return reg;
}

inline std::vector<std::string> known_check_names() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : check_registry()) names.push_back(name);
    return names;
}

// ---------------------------------------------------------------------------
// Runners. Outputs are written atomically (temp file + rename) and the
// reports contain nothing run-dependent beyond the seed, so identical
// config + seed give byte-identical files.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline int run_verify(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& log) {
    ScenarioContext ctx = build_context(cfg);
    std::vector<VerificationReport> reports;
    bool failed = false;
    for (const std::string& name : cfg.checks) {
        const auto it = check_registry().find(name);
        if (it == check_registry().end()) throw ConfigError("unknown check \"" + name + "\"");
        std::vector<VerificationReport> got;
        try {
            got = it->second(ctx);
        } catch (const Error& e) {
            VerificationReport r;
            r.identity = name;
            r.pass = false;
            r.tolerance = 0.0;
            r.max_residual = 9e99;  // sentinel: the check aborted before measuring
            reports.push_back(r);
            log << "[FAIL] " << name << ": " << e.what() << "\n";
            failed = true;
            continue;
        }
        for (auto& r : got) {
            log << (r.pass ? "[PASS] " : "[FAIL] ") << r.identity << "  max=" << r.max_residual
                << "  tol=" << r.tolerance << "  n=" << r.n_samples << "\n";
            if (!r.pass) {
                failed = true;
                log << "       worst sample residual " << r.max_residual << " exceeds "
                    << r.tolerance << "\n";
            }
            reports.push_back(std::move(r));
        }
    }
    nlohmann::json doc;
    doc["schema"] = "report/1";
    doc["scenario"] = cfg.name;
    doc["seed"] = cfg.seed;
    doc["pass"] = !failed;
    doc["results"] = nlohmann::json::array();
    for (const auto& r : reports) doc["results"].push_back(r.to_json());
    detail::write_atomic(std::filesystem::path(out_dir) / cfg.out_report, doc.dump(2) + "\n");
    log << (failed ? "FAILED" : "OK") << ": " << cfg.name << "\n";
    return failed ? 1 : 0;
}

inline int run_geodesic(const ScenarioConfig& cfg, const std::string& out_dir,
                        std::ostream& log) {
    ScenarioContext ctx = build_context(cfg);
    const Vec y0 = cfg.geo_y0;
    GeodesicRecord rec;
    try {
        rec = integrate_geodesic(ctx.metric, cfg.geo_x0, y0, cfg.geo_horizon, ctx.num);
    } catch (const DomainExit& e) {
        log << "geodesic left the admissible set at t = " << e.exit_time << "\n";
        return 1;
    }

    // The flow-transported reference is unit speed in its own parameter;
    // a requested initial speed s traverses it at arc parameter s * t.
    std::optional<GeodesicRecord> ref;
    const double speed0 = ctx.metric.value(cfg.geo_x0, y0);
    if (ctx.datum && ctx.psi && ctx.metric.kind == MetricKind::LorentzCone) {
        const Vec y0n = y0 / speed0;
        const Vec ybase = inverse_map(*ctx.datum, cfg.geo_x0, y0n, ctx.num);
        const double t_ref = speed0 * cfg.geo_horizon;
        const double s_max = std::max(reparam(ctx.psi->dilation, t_ref), t_ref) + 0.05;
        const GeodesicRecord base_geo =
            integrate_geodesic(ctx.datum->base, cfg.geo_x0, ybase, s_max, ctx.num);
        ref = navigated_geodesic(*ctx.datum, *ctx.psi, base_geo, t_ref, ctx.num);
    }

    std::ostringstream os;
    const int n = ctx.config.dim;
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= n; ++i) os << ",v" << i;
    os << ",speed";
    if (ref) {
        for (int i = 1; i <= n; ++i) os << ",nav_x" << i;
        os << ",nav_dev";
    }
    os << "\n";
    for (std::size_t k = 0; k < rec.samples.size(); ++k) {
        const auto& s = rec.samples[k];
        os << detail::format_g17(s.t);
        for (int i = 0; i < n; ++i) os << ',' << detail::format_g17(s.x[i]);
        for (int i = 0; i < n; ++i) os << ',' << detail::format_g17(s.v[i]);
        os << ',' << detail::format_g17(ctx.metric.value(s.x, s.v));
        if (ref) {
            const auto [rx, rv] = interpolate(*ref, speed0 * s.t);
            for (int i = 0; i < n; ++i) os << ',' << detail::format_g17(rx[i]);
            os << ',' << detail::format_g17((s.x - rx).norm());
        }
        os << "\n";
    }
    detail::write_atomic(std::filesystem::path(out_dir) / cfg.out_trajectory, os.str());
    log << "wrote " << rec.samples.size() << " samples: " << cfg.out_trajectory << "\n";
    return 0;
}

inline int run_levelset(const ScenarioConfig& cfg, const std::string& out_dir,
                        std::ostream& log) {
    ScenarioContext ctx = build_context(cfg);
    if (!ctx.field) throw ConfigError("levelset requires a field");
    std::ostringstream os;
    const int n = ctx.config.dim;
    os << "family,level";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    os << "\n";
    const auto emit = [&](const char* family, double level, const LevelSetSample& ls) {
        for (const Vec& p : ls.points) {
            os << family << ',' << detail::format_g17(level);
            for (int i = 0; i < n; ++i) os << ',' << detail::format_g17(p[i]);
            os << "\n";
        }
    };
    try {
        for (double level : cfg.levels) {
            emit("base", level,
                 sample_level(*ctx.field, level, cfg.samples, ctx.region, ctx.rng, ctx.num));
        }
        if (ctx.corr) {
            const ScalarField ft = induced_field(*ctx.corr, ctx.num);
            for (double level : cfg.levels)
                emit("induced", level,
                     sample_level(ft, level, cfg.samples, ctx.region, ctx.rng, ctx.num));
        }
    } catch (const Error& e) {
        log << "levelset sampling failed: " << e.what() << "\n";
        return 1;
    }
    detail::write_atomic(std::filesystem::path(out_dir) / cfg.out_levelset, os.str());
    log << "wrote level sets: " << cfg.out_levelset << "\n";
    return 0;
}

}  // namespace finsler
