// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wtm/errors.hpp"
#include "wtm/grid_function.hpp"
#include "wtm/moser.hpp"
#include "wtm/quadrature.hpp"
#include "wtm/rearrange.hpp"
#include "wtm/reduction.hpp"
#include "wtm/weights.hpp"

namespace wtm {

/// u(x) = phi(D log(R/|x|)) / c on B_R cap Sigma, built from a Moser maximiser.
struct Extremal {
    OneDProfile phi;
    double R = 1.0;
    double coefficient = 1.0;  ///< c in phi = c U
    double a = 0.0;            ///< exponential coefficient matching the report's beta
    double D = 2.0;
    RadialProfile profile;
    GridFunction samples;

    double radial(double r) const {
        if (r >= R) return 0.0;
        if (r <= 0.0) return phi.values().back() / coefficient;
        return phi(D * std::log(R / r)) / coefficient;
    }

    double operator()(std::span<const double> x) const {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return radial(std::sqrt(r2));
    }
};

inline Extremal build_extremal(const MoserReport& report, const WeightSpec& spec, const GeometricConstants& consts,
                               double R = 1.0, std::size_t nodes_per_axis = 128,
                               ScalingConvention conv = ScalingConvention::energy_preserving) {
    if (!report.converged) throw Error(Errc::non_convergence, "extremal needs a converged report");
    if (std::abs(report.q - consts.D) > 1e-9 * consts.D)
        throw Error(Errc::exponent_mismatch, "report exponent q must equal D = " + std::to_string(consts.D));
    if (!(R > 0.0)) throw Error(Errc::nonpositive_radius, "radius must be positive");
    RadialProfile U = phi_to_profile(report.profile, consts, R, conv);
    std::vector<std::size_t> shape(static_cast<std::size_t>(spec.dimension()), nodes_per_axis);
    GridFunction g = sample_radial(U, spec.cone(), shape);
    return Extremal{report.profile,
                    R,
                    phi_coefficient(consts, conv),
                    report.beta * critical_coefficient(consts, conv),
                    consts.D,
                    std::move(U),
                    std::move(g)};
}

namespace detail {

/// Calls visit(x, dmu) over a polar product rule on B_R cap Sigma: Gauss-Legendre
/// in t = D log(R/r) on every profile cell, Gauss-Legendre in r on the inner
/// ball r < R e^{-T/D}, a tensor rule on the angular box.
template <typename Visit>
void for_each_polar_node(const Extremal& u, const WeightSpec& spec, std::size_t angular, Visit&& visit) {
    static const GaussRule rule = gauss_legendre(4);
    const int d = spec.dimension();
    std::vector<double> rs, rw;
    const auto t = u.phi.grid();
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const auto [x, w] = rule.mapped(t[i], t[i + 1]);
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double r = u.R * std::exp(-x[k] / u.D);
            rs.push_back(r);
            rw.push_back(w[k] * r / u.D);
        }
    }
    const double r_inner = u.R * std::exp(-t.back() / u.D);
    const auto [xi, wi] = rule.mapped(0.0, r_inner);
    rs.insert(rs.end(), xi.begin(), xi.end());
    rw.insert(rw.end(), wi.begin(), wi.end());

    std::vector<std::vector<double>> dirs;
    std::vector<double> dw;
    spec.cone().sphere_chart().for_each_node(angular, [&](std::span<const double> th, double w) {
        dirs.emplace_back(th.begin(), th.end());
        dw.push_back(w);
    });
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const double radial_w = rw[i] * std::pow(rs[i], d - 1);
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            for (std::size_t k = 0; k < x.size(); ++k) x[k] = rs[i] * dirs[j][k];
            visit(std::span<const double>(x), radial_w * dw[j] * spec.unchecked(x));
        }
    }
}

}  // namespace detail

/// ||grad u||_{p,mu} by polar quadrature with Cartesian central differences
/// (step 1e-6 |x|), independent of the one-dimensional energy formula.
inline double polar_gradient_norm(const Extremal& u, const WeightSpec& spec, double p, std::size_t angular = 24) {
    detail::require_exponent(p);
    std::vector<double> terms;
    std::vector<double> y;
    detail::for_each_polar_node(u, spec, angular, [&](std::span<const double> x, double w) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        const double h = 1e-6 * std::sqrt(r2);
        y.assign(x.begin(), x.end());
        double g2 = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            y[k] = x[k] + h;
            const double up = u(y);
            y[k] = x[k] - h;
            const double dn = u(y);
            y[k] = x[k];
            const double g = (up - dn) / (2.0 * h);
            g2 += g * g;
        }
        terms.push_back(w * std::pow(g2, 0.5 * p));
    });
    return std::pow(pairwise_sum(terms), 1.0 / p);
}

/// mu(B_R cap Sigma)^{-1} int exp(a u^{D'}) dmu by polar quadrature.
inline double polar_exponential_mean(const Extremal& u, const WeightSpec& spec, const GeometricConstants& consts,
                                     std::size_t angular = 24) {
    const double Dp = consts.conjugate_exponent();
    std::vector<double> terms;
    detail::for_each_polar_node(u, spec, angular, [&](std::span<const double> x, double w) {
        terms.push_back(w * std::exp(u.a * std::pow(u(x), Dp)));
    });
    return pairwise_sum(terms) / ball_measure(consts, u.R);
}

}  // namespace wtm
