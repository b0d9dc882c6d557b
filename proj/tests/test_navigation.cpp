#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "finsler/navigation.hpp"
#include "finsler/zoo.hpp"

using namespace finsler;
using Catch::Approx;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

NavigationDatum radial_datum(int n = 2) {
    return {euclidean(n), VectorFieldSpec::radial_negative(n), 0.5};
}

struct ConeSampler {
    std::mt19937_64 rng{101};
    double u01() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

    // (x, unit y) with the shifted vector comfortably inside the cone
    std::pair<Vec, Vec> draw(const NavigationDatum& d) {
        for (;;) {
            const double r = 1.3 + 2.0 * u01();
            const double a = 2.0 * M_PI * u01();
            const Vec x = v2(r * std::cos(a), r * std::sin(a));
            Vec y = v2(2 * u01() - 1, 2 * u01() - 1);
            if (y.norm() < 1e-3) continue;
            y /= d.base.value(x, y);
            if (!(inner(d.base, x, y, y, d.wind(x)) < -1.05)) continue;
            NumericsConfig strict;
            strict.cone_margin = 5e-3;
            if (!cone_membership(d, x, y + d.wind(x), strict)) continue;
            return {x, y};
        }
    }
};

}  // namespace

TEST_CASE("the forward shift at the reference datum") {
    const NavigationDatum d = radial_datum();
    const Vec x = v2(2, 0);
    SECTION("reference arithmetic") {
        const Vec yt = forward_map(d, x, v2(1, 0));
        CHECK(yt[0] == Approx(-1.0));
        CHECK(yt[1] == Approx(0.0).margin(1e-15));
    }
    SECTION("zero wind is the identity") {
        NavigationDatum still{euclidean(2), VectorFieldSpec::constant(v2(0, 0)), 0.0};
        const Vec y = v2(0.3, -0.8);
        CHECK((forward_map(still, x, y) - y).norm() == Approx(0.0).margin(1e-15));
    }
    SECTION("the shift is positively homogeneous") {
        const Vec y = v2(0.9, 0.1);
        const Vec a = forward_map(d, x, 3.0 * y);
        const Vec b = 3.0 * forward_map(d, x, y);
        CHECK((a - b).norm() == Approx(0.0).margin(1e-12));
    }
    SECTION("vectors outside the pre-cone are rejected") {
        CHECK_THROWS_AS(forward_map(d, x, v2(0, 1)), PreConeViolation);
    }
}

TEST_CASE("inverting the shift") {
    const NavigationDatum d = radial_datum();
    const Vec x = v2(2, 0);
    SECTION("reference inverse") {
        const Vec y = inverse_map(d, x, v2(-1, 0));
        CHECK(y[0] == Approx(1.0).epsilon(1e-12));
        CHECK(y[1] == Approx(0.0).margin(1e-12));
    }
    SECTION("round trips over the sampled cone") {
        ConeSampler s;
        for (int k = 0; k < 100; ++k) {
            const auto [x1, y1] = s.draw(d);
            const Vec yt = forward_map(d, x1, y1);
            const Vec back = inverse_map(d, x1, yt);
            CHECK((back - y1).norm() <= 1e-10 * y1.norm());
        }
    }
    SECTION("boundary vectors are refused") {
        // On the cone edge the discriminant vanishes: y = (-1, 1/sqrt(3)).
        CHECK_THROWS_AS(inverse_map(d, x, v2(-1, 1.0 / std::sqrt(3.0))), ConeViolation);
    }
}

TEST_CASE("cone membership") {
    const NavigationDatum d = radial_datum();
    const Vec x = v2(2, 0);
    CHECK(cone_membership(d, x, v2(-1, 0)));
    CHECK_FALSE(cone_membership(d, x, v2(1, 0)));
    SECTION("membership is scale invariant") {
        ConeSampler s;
        for (int k = 0; k < 30; ++k) {
            const auto [x1, y1] = s.draw(d);
            const Vec yt = forward_map(d, x1, y1);
            CHECK(cone_membership(d, x1, 2.0 * yt) == cone_membership(d, x1, yt));
        }
    }
    SECTION("the generic search agrees with the closed-form cone") {
        auto closed = lorentz_funk(2);
        std::mt19937_64 rng(41);
        const auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        int agree = 0, total = 0;
        for (int k = 0; k < 200; ++k) {
            const Vec y = v2(2 * u01() - 1, 2 * u01() - 1);
            if (y.norm() < 1e-2) continue;
            // skip the margin band, where the two tests may legitimately differ
            const double xy = x.dot(y);
            const double d2 = x.squaredNorm() - xy * xy / y.squaredNorm();
            if (std::abs(std::sqrt(std::max(d2, 0.0)) - 1.0) < 1e-2) continue;
            ++total;
            if (cone_membership(d, x, y) == closed.admissible(x, y)) ++agree;
        }
        CHECK(agree == total);
        CHECK(total > 100);
    }
}

TEST_CASE("fiber tensors transform with the navigation factor") {
    const NavigationDatum d = radial_datum();
    auto induced = lorentz_funk(2);
    SECTION("reference flag: predicted factor -1") {
        CHECK(tensor_relation_residual(d, induced, v2(2, 0), v2(1, 0)) < 1e-7);
    }
    SECTION("sampled flags") {
        ConeSampler s;
        auto generic = navigation_induced(d.base, d.wind);
        for (int k = 0; k < 40; ++k) {
            const auto [x1, y1] = s.draw(d);
            CHECK(tensor_relation_residual(d, generic, x1, y1) < 1e-6);
        }
    }
    SECTION("zero wind degenerates to tensor equality") {
        NavigationDatum still{euclidean(2), VectorFieldSpec::constant(v2(0, 0)), 0.0};
        CHECK(tensor_relation_residual(still, euclidean(2), v2(0, 0), v2(0.6, -0.8)) < 1e-10);
    }
    SECTION("weak drift uses the dual factor") {
        Vec w = v2(0.5, 0);
        NavigationDatum weak{euclidean(2), VectorFieldSpec::constant(w), 0.0};
        auto rd = randers_navigation(2, VectorFieldSpec::constant(w));
        CHECK(tensor_relation_residual(weak, rd, v2(0, 0), v2(0.3, -1.1)) < 1e-7);
    }
}

TEST_CASE("induced cones are convex for a non-Riemannian base") {
    NavigationDatum d{minkowski_quartic(2), VectorFieldSpec::radial_negative(2), 0.5};
    const Vec x = v2(2, 0.7);
    std::mt19937_64 rng(53);
    const auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    NumericsConfig strict;
    strict.cone_margin = 5e-3;
    std::vector<Vec> members;
    while (members.size() < 12) {
        const Vec y = v2(2 * u01() - 1, 2 * u01() - 1);
        if (y.norm() > 1e-2 && cone_membership(d, x, y, strict)) members.push_back(y);
    }
    NumericsConfig loose;
    loose.cone_margin = 1e-6;
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
            CHECK(cone_membership(d, x, 0.5 * (members[i] + members[j]), loose));
}

TEST_CASE("metric transport across the shift") {
    const NavigationDatum d = radial_datum();
    auto induced = lorentz_funk(2);
    ConeSampler s;
    for (int k = 0; k < 100; ++k) {
        const auto [x1, y1] = s.draw(d);
        const double f = d.base.value(x1, y1);
        const Vec yt = forward_map(d, x1, y1);
        CHECK(std::abs(induced.value(x1, yt) - f) <= 1e-9 * f);
    }
}
