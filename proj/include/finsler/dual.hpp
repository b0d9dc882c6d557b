#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace finsler {

/**
 * Forward-mode scalar carrying derivatives along two independent
 * perturbation parameters s and t, up to second order:
 *
 *   v = f,  ds = f_s,  dt = f_t,  dss = f_ss,  dst = f_st,  dtt = f_tt.
 *
 * Seeding a vector argument as  y + s*u + t*v  and evaluating an expression
 * in this algebra yields the value, both first directional derivatives and
 * the full 2x2 block of second directional derivatives in a single pass,
 * exact to roundoff. This is the differentiation currency for every tensor
 * in the library; central differences exist only as a cross-check.
 */
struct Dual2 {
    double v = 0.0;
    double ds = 0.0, dt = 0.0;
    double dss = 0.0, dst = 0.0, dtt = 0.0;

    Dual2() = default;
    Dual2(double value) : v(value) {}  // NOLINT: constants embed implicitly
    Dual2(double value, double s, double t) : v(value), ds(s), dt(t) {}

    bool derivatives_zero() const {
        return ds == 0.0 && dt == 0.0 && dss == 0.0 && dst == 0.0 && dtt == 0.0;
    }
};

inline Dual2 operator+(const Dual2& a, const Dual2& b) {
    Dual2 r;
    r.v = a.v + b.v;
    r.ds = a.ds + b.ds;
    r.dt = a.dt + b.dt;
    r.dss = a.dss + b.dss;
    r.dst = a.dst + b.dst;
    r.dtt = a.dtt + b.dtt;
    return r;
}

inline Dual2 operator-(const Dual2& a, const Dual2& b) {
    Dual2 r;
    r.v = a.v - b.v;
    r.ds = a.ds - b.ds;
    r.dt = a.dt - b.dt;
    r.dss = a.dss - b.dss;
    r.dst = a.dst - b.dst;
    r.dtt = a.dtt - b.dtt;
    return r;
}

inline Dual2 operator-(const Dual2& a) {
    Dual2 r;
    r.v = -a.v;
    r.ds = -a.ds;
    r.dt = -a.dt;
    r.dss = -a.dss;
    r.dst = -a.dst;
    r.dtt = -a.dtt;
    return r;
}

inline Dual2 operator*(const Dual2& a, const Dual2& b) {
    Dual2 r;
    r.v = a.v * b.v;
    r.ds = a.ds * b.v + a.v * b.ds;
    r.dt = a.dt * b.v + a.v * b.dt;
    r.dss = a.dss * b.v + 2.0 * a.ds * b.ds + a.v * b.dss;
    r.dst = a.dst * b.v + a.ds * b.dt + a.dt * b.ds + a.v * b.dst;
    r.dtt = a.dtt * b.v + 2.0 * a.dt * b.dt + a.v * b.dtt;
    return r;
}

/// Composition with a scalar function given value and first two derivatives
/// at f.v. Short-circuits for constants so singular derivatives (e.g. of
/// sqrt at 0) never poison a pure value computation.
inline Dual2 chain(const Dual2& f, double g, double dg, double ddg) {
    if (f.derivatives_zero()) return Dual2(g);
    Dual2 r;
    r.v = g;
    r.ds = dg * f.ds;
    r.dt = dg * f.dt;
    r.dss = dg * f.dss + ddg * f.ds * f.ds;
    r.dst = dg * f.dst + ddg * f.ds * f.dt;
    r.dtt = dg * f.dtt + ddg * f.dt * f.dt;
    return r;
}

inline Dual2 operator/(const Dual2& a, const Dual2& b) {
    const double iv = 1.0 / b.v;
    return a * chain(b, iv, -iv * iv, 2.0 * iv * iv * iv);
}

inline Dual2 operator+(const Dual2& a, double b) { return a + Dual2(b); }
inline Dual2 operator+(double a, const Dual2& b) { return Dual2(a) + b; }
inline Dual2 operator-(const Dual2& a, double b) { return a - Dual2(b); }
inline Dual2 operator-(double a, const Dual2& b) { return Dual2(a) - b; }
inline Dual2 operator*(const Dual2& a, double b) { return a * Dual2(b); }
inline Dual2 operator*(double a, const Dual2& b) { return Dual2(a) * b; }
inline Dual2 operator/(const Dual2& a, double b) { return a / Dual2(b); }
inline Dual2 operator/(double a, const Dual2& b) { return Dual2(a) / b; }

inline bool operator<(const Dual2& a, double b) { return a.v < b; }
inline bool operator>(const Dual2& a, double b) { return a.v > b; }
inline bool operator<=(const Dual2& a, double b) { return a.v <= b; }
inline bool operator>=(const Dual2& a, double b) { return a.v >= b; }

inline Dual2 sqrt(const Dual2& f) {
    const double s = std::sqrt(f.v);
    return chain(f, s, 0.5 / s, -0.25 / (s * s * s));
}

inline Dual2 exp(const Dual2& f) {
    const double e = std::exp(f.v);
    return chain(f, e, e, e);
}

inline Dual2 log(const Dual2& f) {
    const double iv = 1.0 / f.v;
    return chain(f, std::log(f.v), iv, -iv * iv);
}

inline Dual2 pow(const Dual2& f, double p) {
    const double g = std::pow(f.v, p);
    return chain(f, g, p * std::pow(f.v, p - 1.0), p * (p - 1.0) * std::pow(f.v, p - 2.0));
}

inline bool isfinite(const Dual2& f) {
    return std::isfinite(f.v) && std::isfinite(f.ds) && std::isfinite(f.dt) &&
           std::isfinite(f.dss) && std::isfinite(f.dst) && std::isfinite(f.dtt);
}

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using DVec = std::vector<Dual2>;

/// Embed a plain vector as constants.
inline DVec lift(const Vec& a) {
    DVec r(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) r[static_cast<std::size_t>(i)] = Dual2(a[i]);
    return r;
}

/// Seed a + s*u + t*w.
inline DVec seed2(const Vec& a, const Vec& u, const Vec& w) {
    DVec r(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i)
        r[static_cast<std::size_t>(i)] = Dual2(a[i], u[i], w[i]);
    return r;
}

/// Seed a + s*u (t untouched).
inline DVec seed_s(const Vec& a, const Vec& u) {
    DVec r(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i)
        r[static_cast<std::size_t>(i)] = Dual2(a[i], u[i], 0.0);
    return r;
}

/// Seed a + t*w (s untouched).
inline DVec seed_t(const Vec& a, const Vec& w) {
    DVec r(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i)
        r[static_cast<std::size_t>(i)] = Dual2(a[i], 0.0, w[i]);
    return r;
}

inline Dual2 dot(const DVec& a, const DVec& b) {
    Dual2 s(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) s = s + a[i] * b[i];
    return s;
}

inline Vec values(const DVec& a) {
    Vec r(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) r[static_cast<Eigen::Index>(i)] = a[i].v;
    return r;
}

}  // namespace finsler
