#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "finsler/derivatives.hpp"
#include "finsler/zoo.hpp"

using namespace finsler;
using Catch::Approx;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

const MapY kEuclidSq = [](const DVec& y) { return dot(y, y); };
const MapY kQuartic = [](const DVec& y) {
    Dual2 s(0.0);
    for (const auto& yi : y) {
        const Dual2 q = yi * yi;
        s = s + q * q;
    }
    return s;
};

}  // namespace

TEST_CASE("jet of the squared Euclidean norm is exact") {
    const Jet2 j = jet2(kEuclidSq, v2(3, 4), v2(1, 0), v2(1, 0));
    CHECK(j.value == Approx(25.0));
    CHECK(j.d1 == Approx(6.0));
    CHECK(j.d11 == Approx(2.0));
    CHECK(j.d12 == Approx(2.0));
}

TEST_CASE("jet of a separable quartic splits cleanly across directions") {
    const Jet2 j = jet2(kQuartic, v2(1, 1), v2(1, 0), v2(0, 1));
    CHECK(j.d12 == Approx(0.0).margin(1e-14));
    CHECK(j.d11 == Approx(12.0));
    CHECK(j.d22 == Approx(12.0));
}

TEST_CASE("jet of the squared Funk norm reproduces the fiber metric") {
    auto funk = lorentz_funk(2);
    const Vec x = v2(2, 0);
    const MapY map = [&](const DVec& y) {
        const Dual2 f = funk.eval2(lift(x), y);
        return f * f;
    };
    const Jet2 j = jet2(map, v2(-1, 0), v2(0, 1), v2(0, 1));
    CHECK(j.d11 == Approx(-2.0).epsilon(1e-10));  // 2 <u,u> at this flag
}

TEST_CASE("forward-mode and central differences agree on a smooth corpus") {
    const std::vector<MapY> corpus{
        kEuclidSq,
        kQuartic,
        [](const DVec& y) { return exp(y[0] * y[1]) + log(2.0 + y[0] * y[0]); },
        [](const DVec& y) { return sqrt(1.0 + dot(y, y)) / (2.0 + y[1]); },
    };
    std::mt19937_64 rng(99);
    const auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (const auto& map : corpus) {
        for (int k = 0; k < 20; ++k) {
            const Vec base = v2(2 * u01() - 1, 2 * u01() - 1);
            const Vec u = v2(2 * u01() - 1, 2 * u01() - 1);
            const Vec v = v2(2 * u01() - 1, 2 * u01() - 1);
            const Jet2 a = jet2(map, base, u, v);
            const Jet2 b = jet2_fd(map, base, u, v);
            const double tol = std::max(1e-6, 1e-4 * std::abs(a.value));
            CHECK(std::abs(a.d1 - b.d1) < tol);
            CHECK(std::abs(a.d11 - b.d11) < tol);
            CHECK(std::abs(a.d12 - b.d12) < tol);
            CHECK(std::abs(a.d22 - b.d22) < tol);
        }
    }
}

TEST_CASE("jets are symmetric and linear") {
    const MapY f = [](const DVec& y) { return exp(y[0]) * y[1] * y[1]; };
    const MapY g = kEuclidSq;
    const Vec base = v2(0.3, -0.7), u = v2(1, 2), v = v2(-1, 0.5);

    SECTION("mixed second derivatives commute exactly") {
        const Jet2 juv = jet2(f, base, u, v);
        const Jet2 jvu = jet2(f, base, v, u);
        CHECK(juv.d12 == jvu.d12);
    }
    SECTION("jets respect linear combinations to roundoff") {
        const double a = 1.75, b = -0.4;
        const MapY combo = [&](const DVec& y) { return a * f(y) + b * g(y); };
        const Jet2 jc = jet2(combo, base, u, v);
        const Jet2 jf = jet2(f, base, u, v);
        const Jet2 jg = jet2(g, base, u, v);
        CHECK(jc.value == Approx(a * jf.value + b * jg.value).margin(1e-12));
        CHECK(jc.d1 == Approx(a * jf.d1 + b * jg.d1).margin(1e-12));
        CHECK(jc.d11 == Approx(a * jf.d11 + b * jg.d11).margin(1e-12));
        CHECK(jc.d12 == Approx(a * jf.d12 + b * jg.d12).margin(1e-12));
        CHECK(jc.d22 == Approx(a * jf.d22 + b * jg.d22).margin(1e-12));
    }
}

TEST_CASE("point-slot gradients") {
    SECTION("translation-invariant maps have zero gradient") {
        const MapXY map = [](const DVec&, const DVec& y) { return dot(y, y); };
        const Vec g = grad_x(map, v2(5, -3), v2(1, 2));
        CHECK(g.norm() == Approx(0.0).margin(1e-14));
    }
    SECTION("linear coordinate field") {
        const MapXY map = [](const DVec& x, const DVec&) { return x[0]; };
        const Vec g = grad_x(map, v2(0.2, 0.4), v2(1, 0));
        CHECK(g[0] == Approx(1.0));
        CHECK(g[1] == Approx(0.0).margin(1e-15));
    }
    SECTION("squared Funk norm: forward mode matches central differences") {
        auto funk = lorentz_funk(2);
        const MapXY map = [&](const DVec& x, const DVec& y) {
            const Dual2 f = funk.eval2(x, y);
            return f * f;
        };
        const Vec x = v2(2, 0), y = v2(-1, 0);
        const Vec a = grad_x(map, x, y);
        const Vec b = grad_x_fd(map, x, y);
        CHECK(a.norm() > 0.1);
        CHECK((a - b).norm() < 1e-6);
    }
}

TEST_CASE("derivative error paths") {
    SECTION("non-finite evaluations are reported") {
        const MapY bad = [](const DVec& y) { return log(y[0]); };  // negative argument
        CHECK_THROWS_AS(jet2(bad, v2(-1, 0), v2(1, 0), v2(0, 1)), NonFiniteEvaluation);
    }
    SECTION("finite-difference probes respect the domain predicate") {
        const DomainPredicate inside = [](const Vec& p) { return p[0] > 0.999999; };
        CHECK_THROWS_AS(jet2_fd(kEuclidSq, v2(1, 0), v2(1, 0), v2(0, 1), {}, inside),
                        DomainViolation);
    }
    SECTION("configuration invariants are enforced") {
        NumericsConfig bad;
        bad.quad_samples = 10;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = NumericsConfig{};
        bad.cone_margin = 0.7;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = NumericsConfig{};
        bad.fd_step = 0.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
}
