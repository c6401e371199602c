// SPDX-License-Identifier: MIT
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "wtm/fixtures.hpp"
#include "wtm/moser.hpp"
#include "wtm/rearrange.hpp"
#include "wtm/reduction.hpp"

using namespace wtm;
namespace fx = wtm::fixtures;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr auto kUnit = ScalingConvention::unit_measure;
constexpr auto kEnergy = ScalingConvention::energy_preserving;

const GeometricConstants& x1_consts() {
    static const GeometricConstants c = geometric_constants(fx::weight_x1());
    return c;
}

RadialProfile cone_profile() { return RadialProfile({0.0, 1.0}, {1.0, 0.0}); }

RadialProfile bump_profile(const WeightSpec& spec, std::size_t n = 128) {
    return radial_rearrangement(fx::make(fx::Kind::radial_bump, spec, n), spec, geometric_constants(spec));
}

}  // namespace

TEST(Scaling, Coefficients) {
    const auto& c = x1_consts();
    EXPECT_NEAR(phi_coefficient(c, kUnit), std::pow(2.0 / 3.0, 2.0 / 3.0), 1e-14);
    EXPECT_NEAR(phi_coefficient(c, kEnergy), 3.0 * std::pow(2.0 / 3.0, 1.0 / 3.0), 1e-14);
    EXPECT_NEAR(critical_coefficient(c, kUnit), 2.0 / 3.0, 1e-14);
    // D P_w^{1/(D-1)} = 3 sqrt(2)
    EXPECT_NEAR(critical_coefficient(c, kEnergy), 3.0 * std::sqrt(2.0), 1e-12);
}

TEST(GradedGrid, Shape) {
    const auto t = graded_grid(120.0, 64);
    ASSERT_EQ(t.size(), 65u);
    EXPECT_EQ(t.front(), 0.0);
    EXPECT_EQ(t.back(), 120.0);
    const double end = t[1] - t[0];
    const double mid = t[33] - t[32];
    EXPECT_NEAR(mid / end, 3.0, 0.2);
    EXPECT_NEAR(t[64] - t[63], end, 1e-9);
    EXPECT_THROW(graded_grid(0.0, 8), Error);
}

TEST(ProfileToPhi, ZeroProfile) {
    const RadialProfile U({0.0, 1.0}, {0.0, 0.0});
    const auto phi = profile_to_phi(U, x1_consts(), 120.0, 64);
    for (double v : phi.values()) EXPECT_EQ(v, 0.0);
    const auto back = phi_to_profile(phi, x1_consts(), 1.0);
    for (double v : back.values()) EXPECT_EQ(v, 0.0);
}

TEST(ProfileToPhi, LinearProfileUnitScaling) {
    const auto& c = x1_consts();
    const auto phi = profile_to_phi(cone_profile(), c, 120.0, 256, kUnit);
    const double k = std::pow(c.unit_ball_measure, 1.0 / c.conjugate_exponent());
    const auto t = phi.grid();
    for (std::size_t i = 0; i < t.size(); ++i)
        EXPECT_NEAR(phi.values()[i], k * (1.0 - std::exp(-t[i] / c.D)), 1e-13);
}

TEST(PhiToProfile, InverseOfLinearExample) {
    const auto& c = x1_consts();
    const double k = std::pow(c.unit_ball_measure, 1.0 / c.conjugate_exponent());
    const auto t = graded_grid(120.0, 256);
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = k * (1.0 - std::exp(-t[i] / c.D));
    const auto U = phi_to_profile(OneDProfile(t, v), c, 1.0, kUnit);
    for (double r : {0.01, 0.2, 0.5, 0.77, 1.0}) EXPECT_NEAR(U(r), 1.0 - r, 1e-12) << r;
    EXPECT_THROW(phi_to_profile(OneDProfile(t, v), c, 0.0), Error);
}

TEST(ProfileToPhi, BumpRearrangementEndpoint) {
    for (const auto& spec : {fx::weight_x1(), fx::weight_x1x2()}) {
        const auto c = geometric_constants(spec);
        const auto U = bump_profile(spec);
        const auto phi = profile_to_phi(U, c, 40.0 * c.D);
        for (std::size_t i = 1; i < phi.values().size(); ++i) EXPECT_GE(phi.values()[i], phi.values()[i - 1]);
        const double top = U.values()[0];
        EXPECT_NEAR(phi.values().back(), phi_coefficient(c, kEnergy) * top, 1e-2 * phi.values().back());
    }
}

TEST(ProfileToPhi, RejectsIncreasingProfile) {
    try {
        profile_to_phi(RadialProfile({0.0, 0.5, 1.0}, {0.2, 0.5, 0.0}), x1_consts(), 10.0, 16);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::increasing_profile);
    }
    EXPECT_THROW(profile_to_phi(RadialProfile({0.0, 1.0}, {1.0, 0.5}), x1_consts(), 10.0, 16), Error);
}

TEST(ProfileToPhi, MonotonicityProperty) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 4 + static_cast<std::size_t>(u(rng) * 60);
        std::vector<double> r(n + 1), v(n + 1, 0.0);
        for (std::size_t i = 0; i <= n; ++i) r[i] = static_cast<double>(i) / n;
        for (std::size_t i = n; i-- > 0;) v[i] = v[i + 1] + (u(rng) < 0.3 ? 0.0 : u(rng));
        const auto phi = profile_to_phi(RadialProfile(r, v), x1_consts(), 100.0, 300);
        for (std::size_t i = 1; i < phi.values().size(); ++i) EXPECT_GE(phi.values()[i], phi.values()[i - 1]);
    }
}

TEST(RoundTrip, RandomPhiOnAlignedGrid) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto conv : {kEnergy, kUnit}) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto t = graded_grid(60.0 + 100.0 * u(rng), 200);
            std::vector<double> s(t.size() - 1);
            for (auto& x : s) x = u(rng) < 0.2 ? 0.0 : u(rng);
            const auto phi = OneDProfile::from_slopes(t, s);
            const double R = 0.3 + 2.0 * u(rng);
            const auto U = phi_to_profile(phi, x1_consts(), R, conv);
            const auto back = profile_to_phi(U, x1_consts(), t, conv);
            for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(back.values()[i], phi.values()[i], 1e-10);
        }
    }
}

TEST(EnergyIdentity, ZeroProfile) {
    const RadialProfile U({0.0, 1.0}, {0.0, 0.0});
    const auto phi = profile_to_phi(U, x1_consts(), 120.0, 64);
    const auto r = energy_identity(U, phi, x1_consts());
    EXPECT_EQ(r.energy_nd, 0.0);
    EXPECT_EQ(r.energy_1d, 0.0);
    EXPECT_EQ(r.energy_residual, 0.0);
}

TEST(EnergyIdentity, LinearProfile) {
    const auto& c = x1_consts();
    const auto phi = profile_to_phi(cone_profile(), c, 120.0, 2048);
    const auto r = energy_identity(cone_profile(), phi, c);
    EXPECT_NEAR(r.energy_nd, 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(r.energy_1d, 2.0 / 3.0, 1e-3);
    EXPECT_LE(r.energy_residual, 1e-3);
}

TEST(EnergyIdentity, UnitScalingDiscrepancyFactor) {
    // With phi = C_D^{1/D'} U the one-dimensional energy is short by D^D C_D^{2-D}.
    const auto& c = x1_consts();
    const auto phi = profile_to_phi(cone_profile(), c, 120.0, 4096, kUnit);
    const auto r = energy_identity(cone_profile(), phi, c, kUnit);
    const double factor = std::pow(c.D, c.D) * std::pow(c.unit_ball_measure, 2.0 - c.D);
    EXPECT_NEAR(factor, 40.5, 1e-12);
    EXPECT_NEAR(r.energy_nd / r.energy_1d, factor, 5e-2);
}

TEST(EnergyIdentity, MismatchedProfiles) {
    const auto& c = x1_consts();
    const auto phi = profile_to_phi(cone_profile(), c, 120.0, 64);
    const RadialProfile other({0.0, 1.0}, {2.0, 0.0});
    try {
        energy_identity(other, phi, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::mismatched_profiles);
    }
}

TEST(EnergyIdentity, BumpAndMoserProfilesConverge) {
    for (const auto& spec : {fx::weight_x1(), fx::weight_x1x2()}) {
        const auto c = geometric_constants(spec);
        const double a = 0.5 * critical_coefficient(c, kEnergy);
        const auto U = bump_profile(spec);
        const auto coarse = reduce(U, c, a, 40.0 * c.D, 1024);
        const auto fine = reduce(U, c, a, 40.0 * c.D, 2048);
        EXPECT_LE(fine.energy_residual, 1e-3);
        EXPECT_LT(fine.energy_residual, coarse.energy_residual);
    }
    // Moser-type profile: phi from the family at q = D = 3, mapped to U.
    const auto& c = x1_consts();
    MoserProblem p;
    p.q = c.D;
    p.T = 40.0 * c.D;
    p.N = 2048;
    const auto U = phi_to_profile(moser_family(5.0, p), c, 1.0);
    const auto r = reduce(U, c, critical_coefficient(c, kEnergy), p.T, 2048);
    EXPECT_LE(r.energy_residual, 1e-3);
}

TEST(ExponentialIdentity, ZeroProfileGivesOne) {
    const RadialProfile U({0.0, 1.0}, {0.0, 0.0});
    for (auto conv : {kEnergy, kUnit}) {
        const auto phi = profile_to_phi(U, x1_consts(), 120.0, 256, conv);
        for (double f : {0.1, 0.5, 1.0}) {
            const auto r = exponential_identity(U, phi, x1_consts(), f * critical_coefficient(x1_consts(), conv), conv);
            EXPECT_NEAR(r.exp_nd, 1.0, 1e-12);
            EXPECT_NEAR(r.exp_1d, 1.0, 1e-12);
        }
    }
}

TEST(ExponentialIdentity, LinearProfileHalfBetaAgainstAdaptiveQuadrature) {
    const auto& c = x1_consts();
    const double a = c.unit_ball_measure / 2.0;
    const auto phi = profile_to_phi(cone_profile(), c, 120.0, 2048, kUnit);
    const auto r = exponential_identity(cone_profile(), phi, c, a, kUnit);
    EXPECT_DOUBLE_EQ(r.beta, 0.5);
    // Independent oracles for both sides.
    const double Dp = c.conjugate_exponent();
    const double lhs = c.perimeter / c.unit_ball_measure *
                       gauss_kronrod<double, 61>::integrate(
                           [&](double s) { return std::exp(a * std::pow(1.0 - s, Dp)) * s * s; }, 0.0, 1.0, 15, 1e-14);
    boost::math::quadrature::exp_sinh<double> es;
    const double k = std::pow(c.unit_ball_measure, 1.0 / Dp);
    const double rhs = es.integrate(
        [&](double t) { return std::exp(0.5 * std::pow(k * (1.0 - std::exp(-t / 3.0)), Dp) - t); }, 0.0,
        std::numeric_limits<double>::infinity());
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-10);
    EXPECT_NEAR(r.exp_nd / lhs, 1.0, 1e-5);
    EXPECT_NEAR(r.exp_1d / rhs, 1.0, 1e-3);
    EXPECT_LE(r.exp_residual, 1e-3);
}

TEST(ExponentialIdentity, CoefficientOutOfRange) {
    const auto& c = x1_consts();
    const auto phi = profile_to_phi(cone_profile(), c, 120.0, 64, kUnit);
    for (double a : {2.0 * c.unit_ball_measure, 0.0, -1.0}) {
        try {
            exponential_identity(cone_profile(), phi, c, a, kUnit);
            FAIL() << a;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::coefficient_out_of_range);
        }
    }
    const auto phi_e = profile_to_phi(cone_profile(), c, 120.0, 64);
    EXPECT_THROW(exponential_identity(cone_profile(), phi_e, c, 1.01 * critical_coefficient(c, kEnergy)), Error);
}

TEST(ExponentialIdentity, BetaSweepOnBumps) {
    for (const auto& spec : {fx::weight_x1(), fx::weight_x1x2()}) {
        const auto c = geometric_constants(spec);
        const auto U = bump_profile(spec);
        for (double beta : {0.25, 0.5, 0.9, 1.0}) {
            const double a = beta * critical_coefficient(c, kEnergy);
            const auto coarse = reduce(U, c, a, 40.0 * c.D, 1024);
            const auto fine = reduce(U, c, a, 40.0 * c.D, 2048);
            EXPECT_NEAR(fine.beta, beta, 1e-12);
            EXPECT_LE(fine.exp_residual, 1e-3) << beta;
            EXPECT_LE(fine.exp_residual, coarse.exp_residual + 1e-12) << beta;
            if (beta < 1.0) {
                EXPECT_LE(fine.tail, fine.tail_bound);
            } else {
                EXPECT_TRUE(std::isinf(fine.tail_bound));
            }
        }
    }
}

TEST(ExponentialFunctional, TailBoundHolds) {
    // phi with phi(t)^{q'} <= t: the tail never exceeds the bound.
    MoserProblem p;
    const auto phi = moser_family(3.0, p);
    for (double beta : {0.1, 0.5, 0.99}) {
        const auto f = exponential_functional(phi, beta, 2.0);
        EXPECT_GT(f.tail, 0.0);
        EXPECT_LE(f.tail, f.tail_bound);
    }
}

TEST(OneDProfile, Validation) {
    EXPECT_THROW(OneDProfile({0.0, 1.0}, {0.1, 0.2}), Error);
    EXPECT_THROW(OneDProfile({0.0, 1.0, 2.0}, {0.0, 0.5, 0.4}), Error);
    EXPECT_THROW(OneDProfile({0.5, 1.0}, {0.0, 0.5}), Error);
    const OneDProfile phi({0.0, 1.0, 3.0}, {0.0, 1.0, 2.0});
    EXPECT_DOUBLE_EQ(phi(2.0), 1.5);
    EXPECT_DOUBLE_EQ(phi(10.0), 2.0);
    EXPECT_DOUBLE_EQ(dirichlet_energy(phi, 2.0), 1.0 + 0.5);
}
