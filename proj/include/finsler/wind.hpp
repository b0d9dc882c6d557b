#pragma once

#include <functional>
#include <utility>

#include "finsler/dual.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

/**
 * Wind field for the navigation construction. Constant, linear (V = A x) and
 * the radial field V = -x have closed-form flows; Analytic covers anything
 * else (used for deliberately non-homothetic controls) and is integrated
 * numerically. The radial field is homothetic for the Euclidean metric with
 * dilation 1/2.
 */
struct VectorFieldSpec {
    enum class Kind { Constant, Linear, RadialNegative, Analytic };

    Kind kind = Kind::Constant;
    int dim = 0;
    Vec constant_value;
    Mat linear_matrix;
    std::function<DVec(const DVec&)> analytic_eval;

    static VectorFieldSpec constant(Vec v) {
        VectorFieldSpec s;
        s.kind = Kind::Constant;
        s.dim = static_cast<int>(v.size());
        s.constant_value = std::move(v);
        return s;
    }

    static VectorFieldSpec linear(Mat a) {
        VectorFieldSpec s;
        s.kind = Kind::Linear;
        s.dim = static_cast<int>(a.rows());
        s.linear_matrix = std::move(a);
        return s;
    }

    static VectorFieldSpec radial_negative(int n) {
        VectorFieldSpec s;
        s.kind = Kind::RadialNegative;
        s.dim = n;
        return s;
    }

    static VectorFieldSpec analytic(int n, std::function<DVec(const DVec&)> f) {
        VectorFieldSpec s;
        s.kind = Kind::Analytic;
        s.dim = n;
        s.analytic_eval = std::move(f);
        return s;
    }

    DVec eval2(const DVec& x) const {
        switch (kind) {
            case Kind::Constant:
                return lift(constant_value);
            case Kind::Linear: {
                DVec r(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) {
                    Dual2 s(0.0);
                    for (std::size_t j = 0; j < x.size(); ++j)
                        s = s + linear_matrix(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(j)) * x[j];
                    r[i] = s;
                }
                return r;
            }
            case Kind::RadialNegative: {
                DVec r(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) r[i] = -x[i];
                return r;
            }
            case Kind::Analytic:
                return analytic_eval(x);
        }
        throw Error("VectorFieldSpec: unreachable kind");
    }

    Vec operator()(const Vec& x) const { return values(eval2(lift(x))); }

    /// Jacobian DV(x), via forward-mode seeds for the analytic kind.
    Mat jacobian(const Vec& x) const {
        const int n = dim;
        switch (kind) {
            case Kind::Constant:
                return Mat::Zero(n, n);
            case Kind::Linear:
                return linear_matrix;
            case Kind::RadialNegative:
                return -Mat::Identity(n, n);
            case Kind::Analytic: {
                Mat j(n, n);
                for (int c = 0; c < n; ++c) {
                    Vec e = Vec::Zero(n);
                    e[c] = 1.0;
                    const DVec r = analytic_eval(seed_s(x, e));
                    for (int rI = 0; rI < n; ++rI) j(rI, c) = r[static_cast<std::size_t>(rI)].ds;
                }
                return j;
            }
        }
        throw Error("VectorFieldSpec: unreachable kind");
    }
};

}  // namespace finsler
