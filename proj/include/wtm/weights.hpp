// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/random/sobol.hpp>

#include "wtm/errors.hpp"
#include "wtm/quadrature.hpp"

namespace wtm {

/// Orthant-type convex cone {x in R^d : x_j > 0 for j in J}. Axes are 0-based.
class ConeSpec {
public:
    ConeSpec(int dimension, std::vector<int> active) : d_(dimension), active_(std::move(active)) {
        if (d_ < 2) throw Error(Errc::invalid_spec, "dimension must be at least 2");
        std::sort(active_.begin(), active_.end());
        if (active_.empty()) throw Error(Errc::invalid_spec, "cone needs at least one active axis");
        if (std::adjacent_find(active_.begin(), active_.end()) != active_.end())
            throw Error(Errc::invalid_spec, "active axes must be distinct");
        if (active_.front() < 0 || active_.back() >= d_)
            throw Error(Errc::invalid_spec, "active axis out of range");
        mask_.assign(static_cast<std::size_t>(d_), false);
        for (int j : active_) mask_[static_cast<std::size_t>(j)] = true;
    }

    int dimension() const { return d_; }
    const std::vector<int>& active() const { return active_; }
    const std::vector<bool>& mask() const { return mask_; }
    bool is_active(int axis) const { return mask_[static_cast<std::size_t>(axis)]; }

    /// Open cone membership.
    bool contains(std::span<const double> x) const {
        return std::all_of(active_.begin(), active_.end(),
                           [&](int j) { return x[static_cast<std::size_t>(j)] > 0.0; });
    }

    bool in_closure(std::span<const double> x) const {
        return std::all_of(active_.begin(), active_.end(),
                           [&](int j) { return x[static_cast<std::size_t>(j)] >= 0.0; });
    }

    SphereChart sphere_chart() const { return SphereChart(d_, mask_); }

    friend bool operator==(const ConeSpec&, const ConeSpec&) = default;

private:
    int d_;
    std::vector<int> active_;
    std::vector<bool> mask_;
};

/**
 * Monomial weight w(x) = prod_{j in J} x_j^{A_j} on the closure of an
 * orthant-type cone. It is alpha-homogeneous with alpha = sum A_j, and the
 * weighted measure scales like r^D with D = d + alpha.
 */
class WeightSpec {
public:
    WeightSpec(ConeSpec cone, std::vector<double> exponents)
        : cone_(std::move(cone)), exponents_(std::move(exponents)) {
        if (exponents_.size() != cone_.active().size())
            throw Error(Errc::invalid_spec, "one exponent per active axis is required");
        for (double a : exponents_)
            if (!(a > 0.0) || !std::isfinite(a))
                throw Error(Errc::invalid_spec, "exponents must be positive");
        alpha_ = 0.0;
        for (double a : exponents_) alpha_ += a;
        axis_exponent_.assign(static_cast<std::size_t>(cone_.dimension()), 0.0);
        for (std::size_t k = 0; k < exponents_.size(); ++k)
            axis_exponent_[static_cast<std::size_t>(cone_.active()[k])] = exponents_[k];
    }

    const ConeSpec& cone() const { return cone_; }
    int dimension() const { return cone_.dimension(); }
    const std::vector<double>& exponents() const { return exponents_; }

    /// Exponent of axis j (0 for inactive axes).
    double axis_exponent(int axis) const { return axis_exponent_[static_cast<std::size_t>(axis)]; }

    double alpha() const { return alpha_; }
    double effective_dimension() const { return cone_.dimension() + alpha_; }
    /// Hoelder conjugate D' = D / (D - 1).
    double conjugate_exponent() const {
        const double D = effective_dimension();
        return D / (D - 1.0);
    }

    /// Weight value; throws point_outside_cone when x leaves the closure.
    double operator()(std::span<const double> x) const {
        if (!cone_.in_closure(x)) throw Error(Errc::point_outside_cone, "point lies outside the cone closure");
        return unchecked(x);
    }

    /// Weight value for points already known to be in the closure.
    double unchecked(std::span<const double> x) const {
        double w = 1.0;
        const auto& act = cone_.active();
        for (std::size_t k = 0; k < act.size(); ++k) {
            const double xj = x[static_cast<std::size_t>(act[k])];
            if (xj == 0.0) return 0.0;
            w *= std::pow(xj, exponents_[k]);
        }
        return w;
    }

    /// Exact integral of t^{A_axis} over [a, b] (a >= 0 on active axes).
    double axis_integral(int axis, double a, double b) const {
        const double A = axis_exponent(axis);
        if (A == 0.0) return b - a;
        return (std::pow(b, A + 1.0) - std::pow(a, A + 1.0)) / (A + 1.0);
    }

    friend bool operator==(const WeightSpec&, const WeightSpec&) = default;

private:
    ConeSpec cone_;
    std::vector<double> exponents_;
    std::vector<double> axis_exponent_;
    double alpha_ = 0.0;
};

inline double weight_eval(const WeightSpec& spec, std::span<const double> x) { return spec(x); }

struct GeometricConstants {
    double unit_ball_measure = 0.0;  ///< C_D = mu(B_1 cap Sigma)
    double perimeter = 0.0;          ///< P_w = int_{Sigma cap S^{d-1}} w dsigma
    double alpha = 0.0;
    double D = 0.0;
    double residual = 0.0;  ///< |P_w - D C_D| / P_w

    double conjugate_exponent() const { return D / (D - 1.0); }
};

/// C_D from the Gaussian-moment identity
///   int_Sigma w e^{-|x|^2} dx = prod_{j in J} Gamma((A_j+1)/2)/2 * pi^{(d-k)/2}
///                             = C_D Gamma(D/2 + 1),
/// which gives C_D = pi^{(d-k)/2} prod Gamma((A_j+1)/2) / (2^k Gamma(D/2+1)).
inline double unit_ball_measure_closed_form(const WeightSpec& spec) {
    const int d = spec.dimension();
    const auto k = static_cast<int>(spec.exponents().size());
    double log_value = 0.5 * (d - k) * std::log(std::numbers::pi);
    for (double a : spec.exponents()) log_value += std::lgamma(0.5 * (a + 1.0)) - std::log(2.0);
    log_value -= std::lgamma(0.5 * spec.effective_dimension() + 1.0);
    return std::exp(log_value);
}

struct QuadratureEstimate {
    double value = 0.0;
    double error = 0.0;  ///< heuristic indicator (difference to the half-resolution estimate)
    std::size_t nodes = 0;
};

inline constexpr std::size_t kMinimumQuadratureBudget = 10'000;

namespace detail {

// Tensor Gauss-Legendre in (r, angles) with n nodes per coordinate.
inline double polar_ball_quadrature(const WeightSpec& spec, std::size_t n) {
    const int d = spec.dimension();
    const SphereChart chart = spec.cone().sphere_chart();
    auto [rs, rw] = gauss_legendre(n).mapped(0.0, 1.0);
    std::vector<double> terms;
    terms.reserve(rs.size());
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < rs.size(); ++i) {
        std::vector<double> shell;
        chart.for_each_node(n, [&](std::span<const double> u, double w) {
            for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = rs[i] * u[static_cast<std::size_t>(j)];
            shell.push_back(w * spec.unchecked(x));
        });
        terms.push_back(rw[i] * std::pow(rs[i], d - 1) * pairwise_sum(shell));
    }
    return pairwise_sum(terms);
}

// Sobol points with a seeded Cranley-Patterson rotation, rejection onto B_1.
inline double qmc_ball_quadrature(const WeightSpec& spec, std::size_t count, std::uint64_t seed) {
    const int d = spec.dimension();
    boost::random::sobol engine(static_cast<std::size_t>(d));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> shift(static_cast<std::size_t>(d));
    for (auto& s : shift) s = unit(rng);
    double box_volume = 1.0;
    for (int j = 0; j < d; ++j) box_volume *= spec.cone().is_active(j) ? 1.0 : 2.0;
    const double scale = 1.0 / (static_cast<double>(engine.max()) + 1.0);
    std::vector<double> x(static_cast<std::size_t>(d));
    std::vector<double> values;
    values.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double r2 = 0.0;
        for (int j = 0; j < d; ++j) {
            double u = static_cast<double>(engine()) * scale + shift[static_cast<std::size_t>(j)];
            if (u >= 1.0) u -= 1.0;
            const double xj = spec.cone().is_active(j) ? u : 2.0 * u - 1.0;
            x[static_cast<std::size_t>(j)] = xj;
            r2 += xj * xj;
        }
        values.push_back(r2 < 1.0 ? spec.unchecked(x) : 0.0);
    }
    return box_volume * pairwise_sum(values) / static_cast<double>(count);
}

}  // namespace detail

/// Numerical C_D, independent of the closed form: tensor Gauss-Legendre in
/// polar/spherical coordinates for d <= 3, quasi-Monte Carlo for d > 3.
inline QuadratureEstimate unit_ball_measure_quadrature(const WeightSpec& spec, std::size_t budget,
                                                       std::uint64_t seed = 0x5eed) {
    if (budget < kMinimumQuadratureBudget)
        throw Error(Errc::budget_too_small,
                    "quadrature budget must be at least " + std::to_string(kMinimumQuadratureBudget));
    const int d = spec.dimension();
    QuadratureEstimate est;
    if (d <= 3) {
        std::size_t n = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(budget), 1.0 / d)));
        n = std::clamp<std::size_t>(n, 8, 400);
        est.value = detail::polar_ball_quadrature(spec, n);
        const double coarse = detail::polar_ball_quadrature(spec, n / 2);
        est.error = std::max(std::abs(est.value - coarse), 64.0 * 2.2e-16 * std::abs(est.value));
        est.nodes = static_cast<std::size_t>(std::pow(static_cast<double>(n), d));
    } else {
        est.value = detail::qmc_ball_quadrature(spec, budget, seed);
        const double coarse = detail::qmc_ball_quadrature(spec, budget / 2, seed);
        est.error = std::abs(est.value - coarse);
        est.nodes = budget;
    }
    return est;
}

/// mu(B_r cap Sigma) = C_D r^D.
inline double ball_measure(const GeometricConstants& consts, double r) {
    if (!(r > 0.0)) throw Error(Errc::nonpositive_radius, "radius must be positive");
    return consts.unit_ball_measure * std::pow(r, consts.D);
}

/// Weighted surface measure of the unit sphere portion in the cone, by a
/// tensor Gauss-Legendre rule on the hyperspherical chart.
inline double perimeter(const WeightSpec& spec, std::size_t nodes_per_angle = 0) {
    const int d = spec.dimension();
    if (nodes_per_angle == 0) {
        nodes_per_angle = d <= 3 ? 96
                                 : std::max<std::size_t>(
                                       12, static_cast<std::size_t>(std::pow(4.0e6, 1.0 / (d - 1))));
    }
    std::vector<double> terms;
    spec.cone().sphere_chart().for_each_node(nodes_per_angle, [&](std::span<const double> u, double w) {
        terms.push_back(w * spec.unchecked(u));
    });
    return pairwise_sum(terms);
}

inline GeometricConstants geometric_constants(const WeightSpec& spec) {
    GeometricConstants c;
    c.unit_ball_measure = unit_ball_measure_closed_form(spec);
    c.perimeter = perimeter(spec);
    c.alpha = spec.alpha();
    c.D = spec.effective_dimension();
    c.residual = std::abs(c.perimeter - c.D * c.unit_ball_measure) / c.perimeter;
    return c;
}

/**
 * A general alpha-homogeneous weight supplied by the caller. No closed-form
 * constants exist for these; C_D comes from plain Monte Carlo and P_w from
 * the homogeneity relation P_w = D C_D. Concavity of w^{1/alpha} is not
 * checked.
 */
struct HomogeneousWeight {
    int dimension = 2;
    double alpha = 1.0;
    std::function<double(std::span<const double>)> weight;
    std::function<bool(std::span<const double>)> in_cone;
};

inline QuadratureEstimate monte_carlo_unit_ball_measure(const HomogeneousWeight& w, std::size_t budget,
                                                        std::uint64_t seed) {
    if (budget < kMinimumQuadratureBudget)
        throw Error(Errc::budget_too_small,
                    "quadrature budget must be at least " + std::to_string(kMinimumQuadratureBudget));
    if (w.dimension < 2 || !(w.alpha > 0.0) || !w.weight || !w.in_cone)
        throw Error(Errc::invalid_spec, "general weight needs d >= 2, alpha > 0 and callables");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> cube(-1.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(w.dimension));
    // fixed-size chunks keep memory flat and the summation order deterministic
    constexpr std::size_t chunk = 1 << 16;
    std::vector<double> vals, sums, squares;
    vals.reserve(chunk);
    for (std::size_t done = 0; done < budget;) {
        const std::size_t m = std::min(chunk, budget - done);
        vals.clear();
        for (std::size_t i = 0; i < m; ++i) {
            double r2 = 0.0;
            for (auto& xj : x) {
                xj = cube(rng);
                r2 += xj * xj;
            }
            vals.push_back((r2 < 1.0 && w.in_cone(x)) ? w.weight(x) : 0.0);
        }
        sums.push_back(pairwise_sum(vals));
        for (double& v : vals) v *= v;
        squares.push_back(pairwise_sum(vals));
        done += m;
    }
    const double n = static_cast<double>(budget);
    const double volume = std::pow(2.0, w.dimension);
    const double mean = pairwise_sum(sums) / n;
    const double var = std::max(0.0, (pairwise_sum(squares) - n * mean * mean) / (n - 1.0));
    return {volume * mean, volume * std::sqrt(var / n), budget};
}

inline GeometricConstants monte_carlo_constants(const HomogeneousWeight& w, std::size_t budget,
                                                std::uint64_t seed) {
    const QuadratureEstimate est = monte_carlo_unit_ball_measure(w, budget, seed);
    GeometricConstants c;
    c.unit_ball_measure = est.value;
    c.alpha = w.alpha;
    c.D = w.dimension + w.alpha;
    c.perimeter = c.D * est.value;
    c.residual = 0.0;
    return c;
}

}  // namespace wtm
