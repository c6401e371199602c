// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "wtm/errors.hpp"
#include "wtm/quadrature.hpp"
#include "wtm/rearrange.hpp"
#include "wtm/weights.hpp"

namespace wtm {

/**
 * Normalisation of the one-dimensional profile phi(t) = c U(R e^{-t/D}).
 *
 * energy_preserving: c = D C_D^{1/D}. Both integral identities hold:
 *   int |grad u*|^D dmu = int_0^inf (phi')^D dt and the exponential mean
 *   equals int_0^inf exp(beta phi^{D'} - t) dt with beta = a / c^{D'}.
 * unit_measure: c = C_D^{1/D'}, beta = a / C_D. The exponential identity
 *   still holds; the energy identity is off by the factor D^D C_D^{2-D}.
 */
enum class ScalingConvention { energy_preserving, unit_measure };

inline double phi_coefficient(const GeometricConstants& c, ScalingConvention conv) {
    if (conv == ScalingConvention::unit_measure) return std::pow(c.unit_ball_measure, 1.0 / c.conjugate_exponent());
    return c.D * std::pow(c.unit_ball_measure, 1.0 / c.D);
}

/// The coefficient a for which beta = 1 (the critical exponential coefficient).
inline double critical_coefficient(const GeometricConstants& c, ScalingConvention conv) {
    return std::pow(phi_coefficient(c, conv), c.conjugate_exponent());
}

/// N cells on [0, T] whose widths grow geometrically from both ends towards
/// the middle; end cells are `end_ratio` times narrower than middle cells.
inline std::vector<double> graded_grid(double T, std::size_t N, double end_ratio = 3.0) {
    if (!(T > 0.0)) throw Error(Errc::invalid_problem, "truncation T must be positive");
    if (N < 2) throw Error(Errc::invalid_problem, "graded grid needs at least two cells");
    std::vector<double> w(N);
    for (std::size_t k = 0; k < N; ++k) {
        const double x = (static_cast<double>(k) + 0.5) / static_cast<double>(N);
        w[k] = std::pow(end_ratio, -std::abs(2.0 * x - 1.0));
    }
    const double total = pairwise_sum(w);
    std::vector<double> t(N + 1, 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        acc += w[k];
        t[k + 1] = T * acc / total;
    }
    t[N] = T;
    return t;
}

/// Piecewise-linear phi on [0, T] with phi(0) = 0 and nondecreasing values;
/// extended by the constant phi(T) beyond T.
class OneDProfile {
public:
    OneDProfile(std::vector<double> t, std::vector<double> phi) : t_(std::move(t)), phi_(std::move(phi)) {
        if (t_.size() < 2 || t_.size() != phi_.size())
            throw Error(Errc::invalid_profile, "profile needs matching grid and values (>= 2 nodes)");
        if (t_.front() != 0.0) throw Error(Errc::invalid_profile, "grid must start at t = 0");
        if (phi_.front() != 0.0) throw Error(Errc::invalid_profile, "phi(0) must be 0");
        for (std::size_t i = 1; i < t_.size(); ++i) {
            if (!(t_[i] > t_[i - 1])) throw Error(Errc::invalid_profile, "grid must be strictly increasing");
            if (!std::isfinite(phi_[i])) throw Error(Errc::invalid_profile, "phi must be finite");
            if (phi_[i] < phi_[i - 1]) throw Error(Errc::invalid_profile, "phi must be nondecreasing");
        }
    }

    static OneDProfile zero(std::vector<double> t) {
        std::vector<double> v(t.size(), 0.0);
        return OneDProfile(std::move(t), std::move(v));
    }

    /// Builds phi from cell slopes (clipped at 0) on a grid.
    static OneDProfile from_slopes(std::vector<double> t, std::span<const double> slopes) {
        std::vector<double> v(t.size(), 0.0);
        for (std::size_t i = 0; i + 1 < t.size(); ++i)
            v[i + 1] = v[i] + std::max(0.0, slopes[i]) * (t[i + 1] - t[i]);
        return OneDProfile(std::move(t), std::move(v));
    }

    double truncation() const { return t_.back(); }
    std::span<const double> grid() const { return t_; }
    std::span<const double> values() const { return phi_; }
    std::size_t cells() const { return t_.size() - 1; }

    std::vector<double> slopes() const {
        std::vector<double> s(cells());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = (phi_[i + 1] - phi_[i]) / (t_[i + 1] - t_[i]);
        return s;
    }

    double operator()(double t) const {
        if (t <= 0.0) return 0.0;
        if (t >= t_.back()) return phi_.back();
        const auto it = std::upper_bound(t_.begin(), t_.end(), t);
        const auto i = static_cast<std::size_t>(it - t_.begin()) - 1;
        const double s = (t - t_[i]) / (t_[i + 1] - t_[i]);
        return phi_[i] + s * (phi_[i + 1] - phi_[i]);
    }

private:
    std::vector<double> t_;
    std::vector<double> phi_;
};

/// sum over cells of slope^q * dt (exact for piecewise-linear phi).
inline double dirichlet_energy(const OneDProfile& phi, double q) {
    const auto t = phi.grid();
    const auto s = phi.slopes();
    std::vector<double> terms(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) terms[i] = std::pow(s[i], q) * (t[i + 1] - t[i]);
    return pairwise_sum(terms);
}

struct ExponentialFunctional {
    double head = 0.0;        ///< Gauss-Legendre quadrature over [0, T]
    double tail = 0.0;        ///< exp(beta phi(T)^{q'} - T): exact for the constant extension
    double tail_bound = 0.0;  ///< e^{(beta-1)T}/(1-beta) for beta < 1, +inf at beta = 1
    double value() const { return head + tail; }
};

/// int_0^inf exp(beta phi(t)^{qprime} - t) dt for piecewise-linear phi.
inline ExponentialFunctional exponential_functional(const OneDProfile& phi, double beta, double qprime) {
    static const GaussRule rule = gauss_legendre(4);
    const auto t = phi.grid();
    const auto v = phi.values();
    std::vector<double> terms;
    terms.reserve(phi.cells() * rule.size());
    for (std::size_t i = 0; i < phi.cells(); ++i) {
        const double half = 0.5 * (t[i + 1] - t[i]);
        const double mid = 0.5 * (t[i + 1] + t[i]);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double x = mid + half * rule.nodes[q];
            const double p = v[i] + (v[i + 1] - v[i]) * (x - t[i]) / (t[i + 1] - t[i]);
            terms.push_back(half * rule.weights[q] * std::exp(beta * std::pow(p, qprime) - x));
        }
    }
    ExponentialFunctional out;
    out.head = pairwise_sum(terms);
    const double T = phi.truncation();
    out.tail = std::exp(beta * std::pow(v.back(), qprime) - T);
    out.tail_bound = beta < 1.0 ? std::exp((beta - 1.0) * T) / (1.0 - beta) : std::numeric_limits<double>::infinity();
    return out;
}

namespace detail {

inline void require_reducible(const RadialProfile& U) {
    const auto v = U.values();
    const double top = std::max(1.0, *std::max_element(v.begin(), v.end()));
    if (!U.is_nonincreasing(1e-12 * top)) throw Error(Errc::increasing_profile, "U must be nonincreasing");
    if (std::abs(v.back()) > 1e-12 * top) throw Error(Errc::invalid_profile, "U must vanish at r = R");
}

}  // namespace detail

/// phi(t_i) = c U(R e^{-t_i/D}) on the given grid.
inline OneDProfile profile_to_phi(const RadialProfile& U, const GeometricConstants& consts,
                                  std::vector<double> t_grid,
                                  ScalingConvention conv = ScalingConvention::energy_preserving) {
    detail::require_reducible(U);
    const double c = phi_coefficient(consts, conv);
    const double R = U.support_radius();
    std::vector<double> phi(t_grid.size(), 0.0);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        phi[i] = c * U(R * std::exp(-t_grid[i] / consts.D));
        phi[i] = std::max(phi[i], phi[i - 1]);
    }
    return OneDProfile(std::move(t_grid), std::move(phi));
}

/// Graded N-cell grid on [0, T] merged with the images t = D log(R / r_k) of
/// the profile's radii, so that no t-cell straddles a kink of U.
inline std::vector<double> reduction_grid(const RadialProfile& U, const GeometricConstants& consts, double T,
                                          std::size_t N) {
    std::vector<double> t = graded_grid(T, N);
    const double R = U.support_radius();
    for (double r : U.radii()) {
        if (!(r > 0.0) || !(r < R)) continue;
        const double s = consts.D * std::log(R / r);
        if (s < T) t.push_back(s);
    }
    std::sort(t.begin(), t.end());
    const double gap = 1e-9 * T;
    std::vector<double> out{0.0};
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i] - out.back() <= gap) {
            if (t[i] == T) out.back() = T;
            continue;
        }
        out.push_back(t[i]);
    }
    return out;
}

/// phi on reduction_grid(U, consts, T, N).
inline OneDProfile profile_to_phi(const RadialProfile& U, const GeometricConstants& consts, double T,
                                  std::size_t N = 2048,
                                  ScalingConvention conv = ScalingConvention::energy_preserving) {
    return profile_to_phi(U, consts, reduction_grid(U, consts, T, N), conv);
}

/// U(r) = phi(D log(R/r)) / c on the radii {0} u {R e^{-t_i/D}}; U(0) takes
/// the plateau value phi(T)/c.
inline RadialProfile phi_to_profile(const OneDProfile& phi, const GeometricConstants& consts, double R,
                                    ScalingConvention conv = ScalingConvention::energy_preserving) {
    if (!(R > 0.0)) throw Error(Errc::nonpositive_radius, "radius must be positive");
    const double c = phi_coefficient(consts, conv);
    const auto t = phi.grid();
    const auto v = phi.values();
    const std::size_t n = t.size();
    std::vector<double> radii(n + 1), values(n + 1);
    radii[0] = 0.0;
    values[0] = v[n - 1] / c;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = n - i;  // ascending radii
        radii[j] = i == 0 ? R : R * std::exp(-t[i] / consts.D);
        values[j] = v[i] / c;
    }
    return RadialProfile(std::move(radii), std::move(values));
}

struct ReductionReport {
    double energy_nd = 0.0;
    double energy_1d = 0.0;
    double exp_nd = 0.0;
    double exp_1d = 0.0;
    double beta = 0.0;
    double a = 0.0;
    double energy_residual = 0.0;
    double exp_residual = 0.0;
    double tail = 0.0;
    double tail_bound = 0.0;
};

namespace detail {

inline double relative_residual(double x, double y) {
    const double scale = std::max(std::abs(x), std::abs(y));
    return scale == 0.0 ? 0.0 : std::abs(x - y) / scale;
}

inline void require_matching(const RadialProfile& U, const OneDProfile& phi, const GeometricConstants& consts,
                             ScalingConvention conv) {
    const OneDProfile ref = profile_to_phi(U, consts, std::vector<double>(phi.grid().begin(), phi.grid().end()), conv);
    const auto a = ref.values();
    const auto b = phi.values();
    const double top = std::max(1.0, *std::max_element(a.begin(), a.end()));
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-9 * top)
            throw Error(Errc::mismatched_profiles, "phi was not produced from U");
}

}  // namespace detail

/// energy_nd = P_w int_0^R |U'|^D r^{D-1} dr (exact for piecewise-linear U),
/// energy_1d = sum slope^D dt.
inline ReductionReport energy_identity(const RadialProfile& U, const OneDProfile& phi,
                                       const GeometricConstants& consts,
                                       ScalingConvention conv = ScalingConvention::energy_preserving) {
    detail::require_reducible(U);
    detail::require_matching(U, phi, consts, conv);
    ReductionReport rep;
    const auto r = U.radii();
    const auto s = U.slopes();
    std::vector<double> terms(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        terms[i] = std::pow(std::abs(s[i]), consts.D) * (std::pow(r[i + 1], consts.D) - std::pow(r[i], consts.D)) / consts.D;
    rep.energy_nd = consts.perimeter * pairwise_sum(terms);
    rep.energy_1d = dirichlet_energy(phi, consts.D);
    rep.energy_residual = detail::relative_residual(rep.energy_nd, rep.energy_1d);
    return rep;
}

/// exp_nd = mu(B_R cap Sigma)^{-1} int_{B_R cap Sigma} exp(a U^{D'}) dmu through
/// the radial form; exp_1d = int_0^inf exp(beta phi^{D'} - t) dt.
inline ReductionReport exponential_identity(const RadialProfile& U, const OneDProfile& phi,
                                            const GeometricConstants& consts, double a,
                                            ScalingConvention conv = ScalingConvention::energy_preserving) {
    const double a_max = critical_coefficient(consts, conv);
    if (!(a > 0.0) || a > a_max * (1.0 + 1e-12))
        throw Error(Errc::coefficient_out_of_range, "coefficient a must lie in (0, " + std::to_string(a_max) + "]");
    detail::require_reducible(U);
    detail::require_matching(U, phi, consts, conv);
    const double Dp = consts.conjugate_exponent();
    ReductionReport rep;
    rep.a = a;
    rep.beta = std::min(1.0, a / a_max);
    const double R = U.support_radius();
    rep.exp_nd = composition_integral(U, consts, [&](double s) { return std::exp(a * std::pow(s, Dp)); }) /
                 (consts.unit_ball_measure * std::pow(R, consts.D));
    const ExponentialFunctional f = exponential_functional(phi, rep.beta, Dp);
    rep.exp_1d = f.value();
    rep.tail = f.tail;
    rep.tail_bound = f.tail_bound;
    rep.exp_residual = detail::relative_residual(rep.exp_nd, rep.exp_1d);
    return rep;
}

/// Both identities for U at coefficient a, phi built on an N-cell graded grid
/// over [0, T].
inline ReductionReport reduce(const RadialProfile& U, const GeometricConstants& consts, double a, double T,
                              std::size_t N, ScalingConvention conv = ScalingConvention::energy_preserving) {
    const OneDProfile phi = profile_to_phi(U, consts, T, N, conv);
    ReductionReport rep = exponential_identity(U, phi, consts, a, conv);
    const ReductionReport e = energy_identity(U, phi, consts, conv);
    rep.energy_nd = e.energy_nd;
    rep.energy_1d = e.energy_1d;
    rep.energy_residual = e.energy_residual;
    return rep;
}

}  // namespace wtm
