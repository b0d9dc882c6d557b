#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "finsler/calculus.hpp"
#include "finsler/flows.hpp"
#include "finsler/scalar_fields.hpp"
#include "finsler/zoo.hpp"

using namespace finsler;
using Catch::Approx;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec funk_sphere_covector(const Vec& x) {
    const double r = x.norm();
    return Vec(-x / (r * (r - 1.0)));
}

}  // namespace

TEST_CASE("gradients through the fiberwise Legendre map") {
    NumericsConfig cfg;
    SECTION("Euclidean gradients copy the covector") {
        const Vec df = v2(0.3, -1.2);
        CHECK((legendre_gradient(euclidean(2), v2(1, 1), df, cfg) - df).norm() < 1e-12);
    }
    SECTION("the Funk gradient of the log-radial field is unit") {
        auto funk = lorentz_funk(2);
        const Vec x = v2(2, 0);
        const Vec g = legendre_gradient(funk, x, funk_sphere_covector(x), cfg);
        CHECK(funk.value(x, g) == Approx(1.0).epsilon(1e-7));
        CHECK(g[0] == Approx(-1.0).epsilon(1e-9));
    }
    SECTION("the solve round-trips through the forward map") {
        auto funk = lorentz_funk(2);
        std::mt19937_64 rng(13);
        const auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        for (int k = 0; k < 25; ++k) {
            const Vec x = v2(1.6 + u01(), u01() - 0.5);
            const Vec df = funk_sphere_covector(x) * (0.8 + 0.4 * u01());
            const Vec g = legendre_gradient(funk, x, df, cfg);
            CHECK((legendre(funk, x, g, cfg) - df).norm() <= 1e-8 * (1.0 + df.norm()));
        }
    }
    SECTION("distinct admissible starts converge to one gradient") {
        auto funk = lorentz_funk(2);
        const Vec x = v2(2, 0.4);
        const Vec df = funk_sphere_covector(x);
        const Vec ref = legendre_gradient(funk, x, df, cfg);
        std::mt19937_64 rng(29);
        const auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        int tried = 0;
        while (tried < 8) {
            Vec dir = -x + v2(u01() - 0.5, u01() - 0.5);
            dir.normalize();
            const double scale = 0.25 + 3.0 * u01();
            if (!funk.admissible(x, dir * scale)) continue;
            ++tried;
            const Vec got = legendre_gradient(funk, x, df, cfg, dir * scale);
            CHECK((got - ref).norm() < 1e-8);
        }
    }
    SECTION("covectors outside the dual cone are reported") {
        auto funk = lorentz_funk(2);
        // The Legendre image of the cone points opposite to x; +x-aligned
        // covectors have no admissible preimage.
        CHECK_THROWS_AS(legendre_gradient(funk, v2(2, 0), v2(1, 0), cfg), LegendreOutOfRange);
    }
}

TEST_CASE("indicatrix volume densities") {
    NumericsConfig cfg;
    const Vec o = Vec::Zero(2);
    SECTION("Euclidean density is exactly one") {
        CHECK(bh_density(euclidean(2), o, cfg) == 1.0);
    }
    SECTION("quartic density matches the closed-form ball area") {
        const double vol = std::pow(2.0 * std::tgamma(1.25), 2.0) / std::tgamma(1.5);
        const double expected = M_PI / vol;
        CHECK(bh_density(minkowski_quartic(2), o, cfg) ==
              Approx(expected).epsilon(1e-2));
    }
    SECTION("a shifted sphere has unit volume ratio") {
        auto rd = randers_navigation(2, VectorFieldSpec::constant(v2(0.5, 0)));
        CHECK(bh_density(rd, o, cfg) == Approx(1.0).epsilon(1e-2));
    }
    SECTION("cone metrics have no indicatrix body") {
        CHECK_THROWS_AS(bh_density(lorentz_funk(2), v2(2, 0), cfg), KindViolation);
    }
}

TEST_CASE("distortion") {
    NumericsConfig cfg;
    const MeasureDescriptor leb = measure_lebesgue();
    SECTION("flat metric, flat measure") {
        CHECK(distortion(euclidean(2), leb, v2(1, 2), v2(0.3, 1), cfg) ==
              Approx(0.0).margin(1e-12));
    }
    SECTION("zero-homogeneous in the flag") {
        auto funk = lorentz_funk(2);
        const double a = distortion(funk, leb, v2(2, 0), v2(-1, 0.2), cfg);
        const double b = distortion(funk, leb, v2(2, 0), v2(-2, 0.4), cfg);
        CHECK(a == Approx(b).margin(1e-8));
    }
    SECTION("closed form and generic navigation agree") {
        auto funk = lorentz_funk(2);
        auto generic = navigation_induced(euclidean(2), VectorFieldSpec::radial_negative(2));
        const double a = distortion(funk, leb, v2(2, 0), v2(-1, 0), cfg);
        const double b = distortion(generic, leb, v2(2, 0), v2(-1, 0), cfg);
        CHECK(std::isfinite(a));
        CHECK(a == Approx(b).margin(1e-7));
    }
}

TEST_CASE("S-curvature") {
    NumericsConfig cfg;
    const MeasureDescriptor leb = measure_lebesgue();
    SECTION("flat data have none") {
        CHECK(s_curvature(euclidean(2), leb, v2(2, 1), v2(0.6, -0.8), cfg) ==
              Approx(0.0).margin(1e-10));
    }
    SECTION("the Funk metric has constant S on unit flags") {
        auto funk = lorentz_funk(2);
        CHECK(s_curvature(funk, leb, v2(2, 0), v2(-1, 0), cfg) == Approx(1.5).margin(1e-4));
    }
    SECTION("positively 1-homogeneous in the flag") {
        auto funk = lorentz_funk(2);
        const Vec x = v2(2, 0.3), y = v2(-1, 0.1);
        const double s1 = s_curvature(funk, leb, x, y, cfg);
        for (double lam : {0.5, 2.0}) {
            CHECK(s_curvature(funk, leb, x, lam * y, cfg) ==
                  Approx(lam * s1).epsilon(1e-6).margin(1e-6));
        }
    }
    SECTION("the navigation shift adds (n+1) c F") {
        auto funk = lorentz_funk(2);
        NavigationDatum d{euclidean(2), VectorFieldSpec::radial_negative(2), 0.5};
        std::mt19937_64 rng(7);
        const auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        int seen = 0;
        while (seen < 15) {
            const Vec x = v2(1.6 + u01(), u01() - 0.5);
            Vec y = v2(2 * u01() - 1, 2 * u01() - 1);
            if (y.norm() < 1e-2) continue;
            y /= d.base.value(x, y);
            if (!(inner(d.base, x, y, y, d.wind(x), cfg) < -1.1)) continue;
            const Vec yt = forward_map(d, x, y, cfg);
            if (!funk.admissible(x, yt)) continue;
            ++seen;
            const double shift = s_curvature(funk, leb, x, yt, cfg) -
                                 s_curvature(euclidean(2), leb, x, y, cfg);
            CHECK(shift == Approx(3.0 * 0.5).margin(1e-4));
        }
    }
}

TEST_CASE("weighted divergence") {
    NumericsConfig cfg;
    const MeasureDescriptor leb = measure_lebesgue();
    SECTION("constant fields have none") {
        CHECK(divergence(leb, [](const Vec&) { return v2(0.3, 0.4); }, v2(1, 1), cfg) ==
              Approx(0.0).margin(1e-10));
    }
    SECTION("the position field counts dimensions") {
        CHECK(divergence(leb, [](const Vec& p) { return p; }, v2(0.2, -1), cfg) ==
              Approx(2.0).epsilon(1e-9));
    }
    SECTION("radial unit field") {
        CHECK(divergence(leb, [](const Vec& p) { return Vec(p / p.norm()); }, v2(2, 0), cfg) ==
              Approx(0.5).epsilon(1e-8));
    }
}

TEST_CASE("Laplacians") {
    NumericsConfig cfg;
    const MeasureDescriptor leb = measure_lebesgue();
    SECTION("quadratic field traces the Hessian") {
        const ScalarField half_sq{[](const Vec& p) { return 0.5 * p.squaredNorm(); },
                                  [](const Vec& p) { return p; }};
        CHECK(laplacian_dmu(euclidean(2), leb, half_sq, v2(0.7, -0.2), cfg) ==
              Approx(2.0).epsilon(1e-9));
    }
    SECTION("radial distance field") {
        CHECK(laplacian_dmu(euclidean(2), leb, sphere_field(2.0), v2(2, 0), cfg) ==
              Approx(0.5).epsilon(1e-8));
        CHECK(laplacian_osculating(euclidean(2), sphere_field(2.0), v2(2, 0), cfg) ==
              Approx(0.5).epsilon(1e-8));
    }
    SECTION("the two Laplacians differ by S along the gradient") {
        auto funk = lorentz_funk(2);
        const ScalarField ft{
            [](const Vec& p) { return std::log(1.0 / (p.norm() - 1.0)); },
            funk_sphere_covector};
        std::mt19937_64 rng(19);
        const auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        for (int k = 0; k < 8; ++k) {
            const double ang = 0.6 * u01() - 0.3;
            const double r = 1.7 + u01();
            const Vec x = v2(r * std::cos(ang), r * std::sin(ang));
            // base metric variant
            const double lhs_b = laplacian_osculating(euclidean(2), sphere_field(2.0), x, cfg);
            const double rhs_b =
                laplacian_dmu(euclidean(2), leb, sphere_field(2.0), x, cfg) +
                s_curvature(euclidean(2), leb, x, x / x.norm(), cfg);
            CHECK(std::abs(lhs_b - rhs_b) < 1e-4);
            // Lorentz variant
            const Vec g = legendre_gradient(funk, x, ft.d(x, cfg), cfg);
            const double lhs = laplacian_osculating(funk, ft, x, cfg);
            const double rhs = laplacian_dmu(funk, leb, ft, x, cfg) +
                               s_curvature(funk, leb, x, g, cfg);
            CHECK(std::abs(lhs - rhs) < 1e-4);
        }
    }
    SECTION("stencil points falling off the gradient range are reported") {
        auto funk = lorentz_funk(2);
        const ScalarField bad{[](const Vec& p) { return p[0]; },
                              [](const Vec& p) {
                                  Vec g = Vec::Zero(p.size());
                                  g[0] = 1.0;  // +x covector: not in the dual cone
                                  return g;
                              }};
        CHECK_THROWS_AS(laplacian_dmu(funk, leb, bad, v2(2, 0), cfg), LegendreOutOfRange);
    }
}
