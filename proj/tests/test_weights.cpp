// SPDX-License-Identifier: MIT
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "wtm/weights.hpp"

using namespace wtm;
using boost::math::quadrature::gauss_kronrod;

namespace {

WeightSpec x1() { return WeightSpec(ConeSpec(2, {0}), {1.0}); }
WeightSpec x1x2() { return WeightSpec(ConeSpec(2, {0, 1}), {1.0, 1.0}); }

// Cartesian iterated integral of w over B_1 cap Sigma in d = 2:
// x in [0, 1] (axis 0 active), y over the chord, restricted to y > 0 if active.
double cartesian_ball_2d(const WeightSpec& spec, double radius = 1.0) {
    const bool y_active = spec.cone().is_active(1);
    auto outer = [&](double x) {
        const double h = std::sqrt(std::max(0.0, radius * radius - x * x));
        auto inner = [&](double y) {
            const double p[2] = {x, y};
            return spec(p);
        };
        return gauss_kronrod<double, 61>::integrate(inner, y_active ? 0.0 : -h, h, 10, 1e-13);
    };
    return gauss_kronrod<double, 61>::integrate(outer, 0.0, radius, 10, 1e-13);
}

// Same in d = 3 with all axes active.
double cartesian_ball_3d_orthant(const WeightSpec& spec) {
    auto f = [&](double x) {
        const double rx = std::sqrt(std::max(0.0, 1.0 - x * x));
        auto g = [&](double y) {
            const double ry = std::sqrt(std::max(0.0, rx * rx - y * y));
            auto h = [&](double z) {
                const double p[3] = {x, y, z};
                return spec(p);
            };
            return gauss_kronrod<double, 31>::integrate(h, 0.0, ry, 4, 1e-10);
        };
        return gauss_kronrod<double, 31>::integrate(g, 0.0, rx, 4, 1e-10);
    };
    return gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 4, 1e-10);
}

}  // namespace

TEST(Cone, MembershipAndValidation) {
    const ConeSpec c(3, {0, 2});
    const double in[3] = {1.0, -4.0, 0.5};
    const double edge[3] = {0.0, 1.0, 1.0};
    const double out[3] = {1.0, 1.0, -0.1};
    EXPECT_TRUE(c.contains(in));
    EXPECT_FALSE(c.contains(edge));
    EXPECT_TRUE(c.in_closure(edge));
    EXPECT_FALSE(c.in_closure(out));
    EXPECT_THROW(ConeSpec(1, {0}), Error);
    EXPECT_THROW(ConeSpec(2, {}), Error);
    EXPECT_THROW(ConeSpec(2, {0, 0}), Error);
    EXPECT_THROW(ConeSpec(2, {2}), Error);
}

TEST(Weight, DerivedExponents) {
    const WeightSpec w(ConeSpec(3, {0, 1}), {0.5, 1.5});
    EXPECT_DOUBLE_EQ(w.alpha(), 2.0);
    EXPECT_DOUBLE_EQ(w.effective_dimension(), 5.0);
    EXPECT_DOUBLE_EQ(w.conjugate_exponent(), 1.25);
    EXPECT_NEAR(1.0 / w.effective_dimension() + 1.0 / w.conjugate_exponent(), 1.0, 1e-15);
}

TEST(Weight, Evaluation) {
    const double a[2] = {3.0, -5.0};
    EXPECT_DOUBLE_EQ(weight_eval(x1(), a), 3.0);
    const double b[2] = {0.0, 7.0};
    EXPECT_DOUBLE_EQ(weight_eval(x1x2(), b), 0.0);
    const double c[2] = {2.0, 3.0};
    const double c2[2] = {4.0, 6.0};
    EXPECT_DOUBLE_EQ(weight_eval(x1x2(), c2), 24.0);
    EXPECT_DOUBLE_EQ(weight_eval(x1x2(), c2), std::pow(2.0, 2.0) * weight_eval(x1x2(), c));
}

TEST(Weight, OutsideConeThrows) {
    const double p[2] = {-0.1, 1.0};
    try {
        weight_eval(x1(), p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::point_outside_cone);
    }
}

TEST(Weight, NonPositiveExponentRejected) {
    for (double a : {-1.0, 0.0, std::nan("")}) {
        try {
            WeightSpec(ConeSpec(2, {0}), {a});
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::invalid_spec);
            EXPECT_STREQ(e.what(), "exponents must be positive");
        }
    }
    EXPECT_THROW(WeightSpec(ConeSpec(2, {0}), {1.0, 1.0}), Error);
}

TEST(Weight, HomogeneityOnRandomPoints) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-3.0, 3.0), kappa(1e-3, 10.0), expo(0.1, 3.0);
    const std::vector<WeightSpec> specs = {x1(), x1x2(), WeightSpec(ConeSpec(4, {1, 3}), {expo(rng), expo(rng)})};
    for (const auto& spec : specs) {
        for (int i = 0; i < 1000; ++i) {
            std::vector<double> x(static_cast<std::size_t>(spec.dimension()));
            for (auto& v : x) v = coord(rng);
            for (int j : spec.cone().active()) x[static_cast<std::size_t>(j)] = std::abs(x[static_cast<std::size_t>(j)]);
            const double k = kappa(rng);
            std::vector<double> kx(x);
            for (auto& v : kx) v *= k;
            const double lhs = spec(kx);
            const double rhs = std::pow(k, spec.alpha()) * spec(x);
            EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::max(std::abs(lhs), 1e-300));
        }
    }
}

TEST(Constants, ClosedFormAgainstCartesianQuadrature) {
    EXPECT_NEAR(unit_ball_measure_closed_form(x1()), 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(unit_ball_measure_closed_form(x1x2()), 1.0 / 8.0, 1e-14);
    EXPECT_NEAR(unit_ball_measure_closed_form(x1()), cartesian_ball_2d(x1()), 1e-10);
    EXPECT_NEAR(unit_ball_measure_closed_form(x1x2()), cartesian_ball_2d(x1x2()), 1e-10);
    const WeightSpec frac(ConeSpec(2, {1}), {0.5});
    // axis 1 active only: swap roles through a spec with axis 0 active
    const WeightSpec frac0(ConeSpec(2, {0}), {0.5});
    EXPECT_NEAR(unit_ball_measure_closed_form(frac), unit_ball_measure_closed_form(frac0), 1e-15);
    EXPECT_NEAR(unit_ball_measure_closed_form(frac0), cartesian_ball_2d(frac0), 1e-8);
    const WeightSpec w3(ConeSpec(3, {0, 1, 2}), {1.0, 2.0, 0.5});
    EXPECT_NEAR(unit_ball_measure_closed_form(w3), cartesian_ball_3d_orthant(w3), 1e-6);
}

TEST(Constants, QuadratureOracle) {
    const auto e1 = unit_ball_measure_quadrature(x1(), 1'000'000);
    EXPECT_NEAR(e1.value, 2.0 / 3.0, 1e-3);
    const WeightSpec w3(ConeSpec(3, {0, 1, 2}), {1.0, 1.0, 1.0});
    const auto e3 = unit_ball_measure_quadrature(w3, 1'000'000);
    EXPECT_LE(std::abs(e3.value - unit_ball_measure_closed_form(w3)), std::max(e3.error, 1e-12));
    for (const auto& spec : {x1(), x1x2(), WeightSpec(ConeSpec(3, {1}), {2.5})}) {
        const auto e = unit_ball_measure_quadrature(spec, 100'000);
        const double exact = unit_ball_measure_closed_form(spec);
        EXPECT_LE(std::abs(e.value - exact) / exact, 1e-4);
        EXPECT_LE(std::abs(e.value - exact), std::max(e.error, 1e-12));
    }
}

TEST(Constants, QuasiMonteCarloAboveThreeDimensions) {
    const WeightSpec w(ConeSpec(4, {0, 2}), {1.0, 1.0});
    const auto e = unit_ball_measure_quadrature(w, 1 << 18, 11);
    EXPECT_NEAR(e.value / unit_ball_measure_closed_form(w), 1.0, 5e-3);
    const auto again = unit_ball_measure_quadrature(w, 1 << 18, 11);
    EXPECT_EQ(e.value, again.value);
}

TEST(Constants, BudgetTooSmall) {
    try {
        unit_ball_measure_quadrature(x1x2(), 100);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::budget_too_small);
    }
}

TEST(Constants, PerimeterRelation) {
    EXPECT_NEAR(perimeter(x1()), 2.0, 1e-12);
    EXPECT_NEAR(perimeter(x1x2()), 0.5, 1e-12);
    for (const auto& spec : {x1(), x1x2(), WeightSpec(ConeSpec(3, {0, 1, 2}), {1.0, 1.0, 1.0}),
                             WeightSpec(ConeSpec(3, {2}), {1.5}), WeightSpec(ConeSpec(4, {0, 3}), {1.0, 2.0})}) {
        const auto c = geometric_constants(spec);
        EXPECT_LE(c.residual, 1e-4) << "d=" << spec.dimension();
        EXPECT_GT(c.unit_ball_measure, 0.0);
        EXPECT_GT(c.perimeter, 0.0);
    }
}

TEST(Constants, BallMeasure) {
    GeometricConstants c;
    c.unit_ball_measure = 1.0 / 8.0;
    c.D = 4.0;
    EXPECT_DOUBLE_EQ(ball_measure(c, 2.0), 2.0);
    EXPECT_DOUBLE_EQ(ball_measure(c, 1.0), c.unit_ball_measure);
    const auto k = geometric_constants(x1());
    EXPECT_NEAR(ball_measure(k, 0.5), 1.0 / 12.0, 1e-14);
    EXPECT_NEAR(ball_measure(k, 0.5), cartesian_ball_2d(x1(), 0.5), 1e-10);
    for (double r : {0.1, 0.7, 3.0, 17.0})
        EXPECT_NEAR(ball_measure(k, r) / ball_measure(k, 1.0), std::pow(r, k.D), 1e-12 * std::pow(r, k.D));
    EXPECT_THROW(ball_measure(k, 0.0), Error);
    EXPECT_THROW(ball_measure(k, -1.0), Error);
}

TEST(Constants, MonteCarloForUserWeight) {
    HomogeneousWeight w;
    w.dimension = 2;
    w.alpha = 1.0;
    w.weight = [](std::span<const double> x) { return x[0]; };
    w.in_cone = [](std::span<const double> x) { return x[0] > 0.0; };
    const auto e = monte_carlo_unit_ball_measure(w, 400'000, 3);
    EXPECT_NEAR(e.value, 2.0 / 3.0, 5.0 * e.error);
    EXPECT_LT(e.error, 2e-3);
    const auto c = monte_carlo_constants(w, 400'000, 3);
    EXPECT_DOUBLE_EQ(c.D, 3.0);
    EXPECT_NEAR(c.perimeter, c.D * c.unit_ball_measure, 1e-12);
    EXPECT_EQ(monte_carlo_unit_ball_measure(w, 20'000, 9).value, monte_carlo_unit_ball_measure(w, 20'000, 9).value);
}
