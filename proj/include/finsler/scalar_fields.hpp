#pragma once

#include <cmath>

#include "finsler/calculus.hpp"

namespace finsler {

/// f(x) = |x| - a: normalized at every point of the sphere of radius a,
/// with unit Euclidean gradient everywhere away from the origin.
inline ScalarField sphere_field(double a) {
    return {[a](const Vec& x) { return x.norm() - a; },
            [](const Vec& x) { return Vec(x / x.norm()); }};
}

/// f(x) = x^1 - a: the affine distance to the hyperplane x^1 = a.
inline ScalarField hyperplane_field(double a) {
    return {[a](const Vec& x) { return x[0] - a; },
            [](const Vec& x) {
                Vec g = Vec::Zero(x.size());
                g[0] = 1.0;
                return g;
            }};
}

/// f(x) = <w, x> - b: a hyperplane family in a general direction. Normalized
/// for a metric F when w is the Legendre image of an F-unit vector.
inline ScalarField affine_field(Vec w, double b) {
    return {[w, b](const Vec& x) { return w.dot(x) - b; }, [w](const Vec&) { return w; }};
}

/// f(x) = x^1 x^2: gradient norm varies along level sets, so this is a
/// negative control for the transnormal check.
inline ScalarField bilinear_field() {
    return {[](const Vec& x) { return x[0] * x[1]; },
            [](const Vec& x) {
                Vec g = Vec::Zero(x.size());
                g[0] = x[1];
                g[1] = x[0];
                return g;
            }};
}

/// ln((a-1)/(|x|-1)): the image of the sphere family under the level-set
/// correspondence of the Funk datum.
inline ScalarField funk_sphere_field(double a) {
    return {[a](const Vec& x) { return std::log((a - 1.0) / (x.norm() - 1.0)); },
            [](const Vec& x) {
                const double r = x.norm();
                return Vec(-x / (r * (r - 1.0)));
            }};
}

/// ln((a-1)/(x^1-1)): the image of the hyperplane family.
inline ScalarField funk_hyperplane_field(double a) {
    return {[a](const Vec& x) { return std::log((a - 1.0) / (x[0] - 1.0)); },
            [](const Vec& x) {
                Vec g = Vec::Zero(x.size());
                g[0] = -1.0 / (x[0] - 1.0);
                return g;
            }};
}

}  // namespace finsler
