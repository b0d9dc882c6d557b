#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "finsler/derivatives.hpp"
#include "finsler/dual.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

enum class MetricKind { FinslerPositiveDefinite, LorentzCone };

/**
 * A Finsler or Lorentz-Finsler metric in a single coordinate chart:
 * positively 1-homogeneous in y, smooth on the admissible set. The evaluator
 * runs in the Dual2 algebra so every tensor below is computed from exact
 * directional derivatives of F^2. `admissible` is the margin-shrunk cone
 * predicate; for positive definite metrics it is simply y != 0.
 */
struct MetricDescriptor {
    int dim = 0;
    MetricKind kind = MetricKind::FinslerPositiveDefinite;
    std::string name;
    std::function<Dual2(const DVec&, const DVec&)> eval2;
    std::function<bool(const Vec&, const Vec&)> admissible;

    double value(const Vec& x, const Vec& y) const {
        return eval2(lift(x), lift(y)).v;
    }
};

/// Fundamental tensor g_ij(x, y) with its base point and flag direction.
struct TensorValue {
    Mat matrix;
    Vec base_x;
    Vec base_y;
};

namespace detail {

inline void require_admissible(const MetricDescriptor& m, const Vec& x, const Vec& y,
                               const char* where) {
    if (!m.admissible(x, y))
        throw DomainViolation(std::string(where) + ": (x, y) outside the admissible set of " + m.name);
}

inline Vec axis(int n, int i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    return e;
}

}  // namespace detail

/// Hessian of F^2/2 in the fiber variable. Positive definite for Finsler
/// metrics, signature (1, n-1) on the cone for Lorentz metrics.
inline TensorValue fundamental_tensor(const MetricDescriptor& m, const Vec& x, const Vec& y,
                                      const NumericsConfig& cfg = {}) {
    cfg.validate();
    detail::require_admissible(m, x, y, "fundamental_tensor");
    const int n = m.dim;
    Mat g(n, n);
    const DVec xc = lift(x);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const Dual2 f = m.eval2(xc, seed2(y, detail::axis(n, i), detail::axis(n, j)));
            detail::require_finite(f, "fundamental_tensor");
            const Dual2 f2 = f * f;
            g(i, j) = 0.5 * f2.dst;
            g(j, i) = g(i, j);
        }
    }
    const double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-300);
    if (std::abs(g.determinant()) < 1e-12 * std::pow(scale, n))
        throw DegenerateTensor("fundamental_tensor: |det g| below degeneracy threshold");
    return TensorValue{std::move(g), x, y};
}

/// <u, v> with respect to the fundamental tensor at flag (x, y).
inline double inner(const MetricDescriptor& m, const Vec& x, const Vec& y, const Vec& u,
                    const Vec& v, const NumericsConfig& cfg = {}) {
    cfg.validate();
    detail::require_admissible(m, x, y, "inner");
    const Dual2 f = m.eval2(lift(x), seed2(y, u, v));
    detail::require_finite(f, "inner");
    const Dual2 f2 = f * f;
    return 0.5 * f2.dst;
}

/// Eigenvalue sign counts (positive, negative) of the fundamental tensor.
inline std::pair<int, int> signature(const MetricDescriptor& m, const Vec& x, const Vec& y,
                                     const NumericsConfig& cfg = {}) {
    const TensorValue g = fundamental_tensor(m, x, y, cfg);
    Eigen::SelfAdjointEigenSolver<Mat> es(g.matrix);
    const Vec ev = es.eigenvalues();
    const double thr = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    int pos = 0, neg = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] > thr)
            ++pos;
        else if (ev[i] < -thr)
            ++neg;
        else
            throw DegenerateTensor("signature: eigenvalue within roundoff of zero");
    }
    return {pos, neg};
}

/// max over lambda of |F(x, lambda y) - lambda F(x, y)| / (lambda F(x, y)).
inline double homogeneity_residual(const MetricDescriptor& m, const Vec& x, const Vec& y,
                                   const std::vector<double>& lambdas) {
    detail::require_admissible(m, x, y, "homogeneity_residual");
    const double f = m.value(x, y);
    double worst = 0.0;
    for (double lam : lambdas) {
        const double fl = m.value(x, lam * y);
        worst = std::max(worst, std::abs(fl - lam * f) / (lam * f));
    }
    return worst;
}

}  // namespace finsler
