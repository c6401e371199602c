// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "wtm/errors.hpp"
#include "wtm/grid_function.hpp"
#include "wtm/quadrature.hpp"
#include "wtm/weights.hpp"

namespace wtm {

/// Radial function U on [0, R], piecewise linear between nodes, zero beyond R.
class RadialProfile {
public:
    RadialProfile() = default;

    RadialProfile(std::vector<double> radii, std::vector<double> values)
        : radii_(std::move(radii)), values_(std::move(values)) {
        if (radii_.size() < 2 || radii_.size() != values_.size())
            throw Error(Errc::invalid_profile, "radial profile needs matching radii and values (>= 2 nodes)");
        if (radii_.front() != 0.0) throw Error(Errc::invalid_profile, "radial grid must start at r = 0");
        for (std::size_t i = 1; i < radii_.size(); ++i)
            if (!(radii_[i] > radii_[i - 1]))
                throw Error(Errc::invalid_profile, "radial grid must be strictly increasing");
        for (double v : values_)
            if (!std::isfinite(v)) throw Error(Errc::invalid_profile, "profile values must be finite");
    }

    double support_radius() const { return radii_.back(); }
    std::span<const double> radii() const { return radii_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return radii_.size(); }

    bool is_nonincreasing(double tol = 0.0) const {
        for (std::size_t i = 1; i < values_.size(); ++i)
            if (values_[i] > values_[i - 1] + tol) return false;
        return true;
    }

    double operator()(double r) const {
        if (r >= radii_.back()) return r == radii_.back() ? values_.back() : 0.0;
        if (r <= 0.0) return values_.front();
        const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
        const auto i = static_cast<std::size_t>(it - radii_.begin()) - 1;
        if (r == radii_[i]) return values_[i];
        const double s = (r - radii_[i]) / (radii_[i + 1] - radii_[i]);
        return values_[i] + s * (values_[i + 1] - values_[i]);
    }

    /// sup{r : U(r) > t} for nonincreasing U; 0 if U <= t everywhere.
    double superlevel_radius(double t) const {
        for (std::size_t i = radii_.size() - 1; i-- > 0;) {
            if (!(values_[i] > t)) continue;
            if (values_[i + 1] > t) return radii_[i + 1];
            return radii_[i] + (radii_[i + 1] - radii_[i]) * (values_[i] - t) / (values_[i] - values_[i + 1]);
        }
        return 0.0;
    }

    /// Cell slopes U'(r) of the piecewise-linear interpolant.
    std::vector<double> slopes() const {
        std::vector<double> s(radii_.size() - 1);
        for (std::size_t i = 0; i + 1 < radii_.size(); ++i)
            s[i] = (values_[i + 1] - values_[i]) / (radii_[i + 1] - radii_[i]);
        return s;
    }

private:
    std::vector<double> radii_;
    std::vector<double> values_;
};

/// Distribution function mu{|f| > tau_i} sampled at strictly increasing
/// thresholds, plus the measure of the support (the tau -> 0+ limit).
struct StepDistribution {
    std::vector<double> thresholds;
    std::vector<double> measures;
    double support_measure = 0.0;
};

/// Log-spaced thresholds between the smallest positive |sample| and the
/// largest one.
inline std::vector<double> default_thresholds(const GridFunction& f, std::size_t count = 256) {
    double lo = 0.0;
    double hi = 0.0;
    for (double v : f.values()) {
        const double a = std::abs(v);
        if (a > 0.0) {
            lo = lo == 0.0 ? a : std::min(lo, a);
            hi = std::max(hi, a);
        }
    }
    if (hi == 0.0) throw Error(Errc::zero_function, "zero function");
    if (lo == hi || count < 2) return {hi};
    std::vector<double> t;
    t.reserve(count);
    const double ratio = std::log(hi / lo);
    for (std::size_t i = 0; i < count; ++i) {
        const double v = i + 1 == count ? hi : lo * std::exp(ratio * static_cast<double>(i) / (count - 1));
        if (t.empty() || v > t.back()) t.push_back(v);
    }
    return t;
}

/// Corner-count quadrature of mu{|f| > tau}: each cell contributes the share
/// of its weighted mass carried by the corners above tau.
inline StepDistribution distribution(const GridFunction& f, const WeightSpec& spec,
                                     std::span<const double> thresholds) {
    if (thresholds.empty()) throw Error(Errc::empty_thresholds, "threshold list is empty");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0)) throw Error(Errc::invalid_thresholds, "thresholds must be positive");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
            throw Error(Errc::invalid_thresholds, "thresholds must be strictly increasing");
    }
    require_compact_support(f, spec);
    const std::vector<double> mass = node_masses(f, spec);
    std::vector<std::pair<double, double>> nodes;  // (|f|, mass), |f| > 0
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double a = std::abs(f.values()[k]);
        if (a > 0.0) nodes.emplace_back(a, mass[k]);
    }
    std::sort(nodes.begin(), nodes.end());
    // above[i] = mass of nodes[i..]
    std::vector<double> above(nodes.size() + 1, 0.0);
    for (std::size_t i = nodes.size(); i-- > 0;) above[i] = above[i + 1] + nodes[i].second;

    StepDistribution dist;
    dist.thresholds.assign(thresholds.begin(), thresholds.end());
    dist.support_measure = above[0];
    for (double tau : thresholds) {
        const auto it = std::upper_bound(nodes.begin(), nodes.end(), tau,
                                         [](double v, const auto& n) { return v < n.first; });
        dist.measures.push_back(above[static_cast<std::size_t>(it - nodes.begin())]);
    }
    return dist;
}

inline StepDistribution distribution(const GridFunction& f, const WeightSpec& spec) {
    const auto t = default_thresholds(f);
    return distribution(f, spec, t);
}

/// f*(t) = inf{tau > 0 : mu(tau) <= t} evaluated on the step data. Returns 0
/// once t reaches the support measure and the top threshold if t lies below
/// every sampled measure.
inline double decreasing_rearrangement(const StepDistribution& dist, double t) {
    if (!(t > 0.0)) throw Error(Errc::nonpositive_measure, "measure argument t must be positive");
    if (t >= dist.support_measure) return 0.0;
    for (std::size_t i = 0; i < dist.measures.size(); ++i)
        if (dist.measures[i] <= t) return dist.thresholds[i];
    return dist.thresholds.back();
}

/**
 * Atomic distribution of |f| with one atom per nonzero node, carrying the
 * node's weighted mass. At every threshold it agrees with the corner-count
 * distribution. Prefix sums give the quantile function Q(m) and its
 * integral in closed form.
 */
class NodeDistribution {
public:
    NodeDistribution(const GridFunction& f, std::span<const double> masses) {
        const auto vals = f.values();
        for (std::size_t k = 0; k < f.size(); ++k)
            if (vals[k] != 0.0) atoms_.push_back({std::abs(vals[k]), masses[k]});
        std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.value > b.value; });
        mass_.assign(1, 0.0);
        moment_.assign(1, 0.0);
        for (const Atom& a : atoms_) {
            mass_.push_back(mass_.back() + a.mass);
            moment_.push_back(moment_.back() + a.mass * a.value);
        }
    }

    double total() const { return mass_.back(); }

    /// mu{|f| > tau}.
    double measure(double tau) const {
        const auto it =
            std::partition_point(atoms_.begin(), atoms_.end(), [tau](const Atom& a) { return a.value > tau; });
        return mass_[static_cast<std::size_t>(it - atoms_.begin())];
    }

    /// Q(m) = inf{tau : mu{|f| > tau} <= m}.
    double quantile(double m) const {
        const auto it = std::upper_bound(mass_.begin() + 1, mass_.end(), m);
        if (it == mass_.end()) return 0.0;
        return atoms_[static_cast<std::size_t>(it - mass_.begin()) - 1].value;
    }

    /// int_0^m Q.
    double integral(double m) const {
        if (m <= 0.0) return 0.0;
        if (m >= total()) return moment_.back();
        const auto i = static_cast<std::size_t>(std::upper_bound(mass_.begin(), mass_.end(), m) - mass_.begin()) - 1;
        return moment_[i] + (m - mass_[i]) * atoms_[i].value;
    }

    /// Mean of Q over [a, b].
    double mean(double a, double b) const {
        if (!(b > a)) return quantile(a);
        return (integral(b) - integral(a)) / (b - a);
    }

private:
    struct Atom {
        double value;
        double mass;
    };
    std::vector<Atom> atoms_;
    std::vector<double> mass_;    // mass_[i]: measure of the i largest atoms
    std::vector<double> moment_;  // moment_[i]: sum of value * mass over them
};

/**
 * Radial rearrangement U(r) = f*(C_D r^D) on a uniform grid of n cells over
 * [0, R], where mu(B_R cap Sigma) is the node-quadrature measure of the
 * support. The node distribution fluctuates on the lattice scale, so U(r_k)
 * is the mean of f* over the mass of the shell |r - r_k| < w/2, with w =
 * `smoothing` times the finest grid spacing; the mean of a nonincreasing function is still
 * nonincreasing. Samples outside the cone never occur: the box lies in the
 * cone closure.
 */
inline RadialProfile radial_rearrangement(const GridFunction& f, const WeightSpec& spec,
                                          const GeometricConstants& consts, std::size_t n = 512,
                                          double smoothing = 0.75) {
    require_compact_support(f, spec);
    if (f.max_abs() == 0.0) throw Error(Errc::zero_function, "zero function");
    if (n < 2) throw Error(Errc::invalid_profile, "radial resolution must be at least 2");
    const std::vector<double> mass = node_masses(f, spec);
    const NodeDistribution dist(f, mass);
    if (!(dist.total() > 0.0)) throw Error(Errc::zero_function, "zero function");
    const double D = consts.D;
    const double C = consts.unit_ball_measure;
    const double R = std::pow(dist.total() / C, 1.0 / D);
    double h = f.spacing(0);
    for (std::size_t k = 1; k < f.dimension(); ++k) h = std::min(h, f.spacing(k));
    const double w = smoothing * h;
    std::vector<double> radii(n + 1), values(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        radii[k] = k == n ? R : R * static_cast<double>(k) / static_cast<double>(n);
        if (k == n) {
            values[k] = 0.0;
            break;
        }
        const double a = std::max(0.0, radii[k] - 0.5 * w);
        const double b = std::min(R, radii[k] + 0.5 * w);
        values[k] = dist.mean(C * std::pow(a, D), C * std::pow(b, D));
        if (k > 0) values[k] = std::min(values[k], values[k - 1]);  // rounding in the prefix sums
    }
    return RadialProfile(std::move(radii), std::move(values));
}

inline RadialProfile radial_rearrangement(const GridFunction& f, const WeightSpec& spec, std::size_t n = 512) {
    return radial_rearrangement(f, spec, geometric_constants(spec), n);
}

/// Samples x -> U(|x|) on a box just covering B_R cap Sigma, with at least two
/// empty layers inside every face that is not on the cone boundary.
inline GridFunction sample_radial(const RadialProfile& U, const ConeSpec& cone,
                                  const std::vector<std::size_t>& shape) {
    const std::size_t d = static_cast<std::size_t>(cone.dimension());
    if (shape.size() != d) throw Error(Errc::invalid_grid, "shape dimension does not match the cone");
    const double R = U.support_radius();
    Box box;
    for (std::size_t k = 0; k < d; ++k) {
        const double n = static_cast<double>(shape[k]);
        if (shape[k] < GridFunction::kMinNodesPerAxis)
            throw Error(Errc::invalid_grid, "at least 8 nodes per axis are required");
        if (cone.is_active(static_cast<int>(k))) {
            box.lower.push_back(0.0);
            box.upper.push_back(R * (n - 1.0) / (n - 3.0));
        } else {
            const double e = R * (n - 1.0) / (n - 5.0);
            box.lower.push_back(-e);
            box.upper.push_back(e);
        }
    }
    return GridFunction::sample(box, shape, [&](std::span<const double> x) {
        double r2 = 0.0;
        for (double xi : x) r2 += xi * xi;
        const double r = std::sqrt(r2);
        return r < R ? U(r) : 0.0;
    });
}

namespace detail {

template <typename Psi>
void require_increasing(Psi&& psi, double top) {
    double prev = psi(top / 64.0);
    for (int k = 2; k <= 64; ++k) {
        const double cur = psi(top * k / 64.0);
        if (!(cur > prev)) throw Error(Errc::nonincreasing_psi, "Psi must be increasing on the range of |f|");
        prev = cur;
    }
}

}  // namespace detail

/// int_{spt f} Psi(|f|) dmu by node quadrature. Integrals run over the support
/// so that Psi(0) != 0 (e.g. exponentials) compares against the ball B_R.
template <typename Psi>
double composition_integral(const GridFunction& f, const WeightSpec& spec, Psi&& psi) {
    const double top = f.max_abs();
    if (top > 0.0) detail::require_increasing(psi, top);
    const std::vector<double> mass = node_masses(f, spec);
    std::vector<double> terms;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double a = std::abs(f.values()[k]);
        if (a > 0.0) terms.push_back(mass[k] * psi(a));
    }
    return pairwise_sum(terms);
}

/// P_w int_0^R Psi(U(r)) r^{D-1} dr, Gauss-Legendre on every profile cell.
template <typename Psi>
double composition_integral(const RadialProfile& U, const GeometricConstants& consts, Psi&& psi) {
    const double top = *std::max_element(U.values().begin(), U.values().end());
    if (top > 0.0) detail::require_increasing(psi, top);
    static const GaussRule rule = gauss_legendre(8);
    const auto r = U.radii();
    const auto v = U.values();
    std::vector<double> terms;
    terms.reserve(r.size() * rule.size());
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        const double half = 0.5 * (r[i + 1] - r[i]);
        const double mid = 0.5 * (r[i + 1] + r[i]);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double x = mid + half * rule.nodes[q];
            const double s = (x - r[i]) / (r[i + 1] - r[i]);
            const double u = v[i] + s * (v[i + 1] - v[i]);
            terms.push_back(half * rule.weights[q] * psi(u) * std::pow(x, consts.D - 1.0));
        }
    }
    return consts.perimeter * pairwise_sum(terms);
}

namespace detail {

inline void require_exponent(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw Error(Errc::exponent_out_of_range, "p must lie in [1, inf)");
}

}  // namespace detail

/// ||grad f||_{p,mu}: central differences (second-order one-sided on the box
/// faces) and node quadrature against the weight.
inline double gradient_seminorm(const GridFunction& f, const WeightSpec& spec, double p) {
    detail::require_exponent(p);
    const std::size_t d = f.dimension();
    const std::vector<double> mass = node_masses(f, spec);
    const auto vals = f.values();
    std::vector<double> terms(f.size(), 0.0);
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        const auto idx = f.unflatten(flat);
        double g2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t n = f.shape()[k];
            const std::size_t s = f.strides()[k];
            const double h = f.spacing(k);
            double g;
            if (idx[k] == 0)
                g = (-3.0 * vals[flat] + 4.0 * vals[flat + s] - vals[flat + 2 * s]) / (2.0 * h);
            else if (idx[k] + 1 == n)
                g = (3.0 * vals[flat] - 4.0 * vals[flat - s] + vals[flat - 2 * s]) / (2.0 * h);
            else
                g = (vals[flat + s] - vals[flat - s]) / (2.0 * h);
            g2 += g * g;
        }
        if (g2 > 0.0) terms[flat] = mass[flat] * std::pow(g2, 0.5 * p);
    }
    return std::pow(pairwise_sum(terms), 1.0 / p);
}

/// ||U'||_{p,mu} for a radial profile: (P_w sum |slope|^p (r_{i+1}^D - r_i^D)/D)^{1/p}.
inline double radial_gradient_norm(const RadialProfile& U, const GeometricConstants& consts, double p) {
    detail::require_exponent(p);
    const auto r = U.radii();
    const auto s = U.slopes();
    std::vector<double> terms(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        terms[i] = std::pow(std::abs(s[i]), p) * (std::pow(r[i + 1], consts.D) - std::pow(r[i], consts.D)) / consts.D;
    return std::pow(consts.perimeter * pairwise_sum(terms), 1.0 / p);
}

struct PolyaSzegoReport {
    double lhs = 0.0;  ///< ||grad f*||_{p,mu}
    double rhs = 0.0;  ///< ||grad f||_{p,mu}
    bool holds = false;
};

inline PolyaSzegoReport polya_szego_check(const GridFunction& f, const WeightSpec& spec,
                                          const GeometricConstants& consts, double p, double slack = 1e-2,
                                          std::size_t radial_n = 512) {
    detail::require_exponent(p);
    const RadialProfile U = radial_rearrangement(f, spec, consts, radial_n);
    PolyaSzegoReport rep;
    rep.lhs = radial_gradient_norm(U, consts, p);
    rep.rhs = gradient_seminorm(f, spec, p);
    rep.holds = rep.lhs <= rep.rhs * (1.0 + slack);
    return rep;
}

struct EquimeasurabilityReport {
    std::vector<double> thresholds;
    std::vector<double> measure_original;
    std::vector<double> measure_rearranged;
    double support_radius = 0.0;
    double sup_relative = 0.0;  ///< max_i |difference| / max_i measure_original
};

/// Compares the distribution of f on the threshold grid with the exact
/// distribution of its radial rearrangement, mu{U(|x|) > tau} = C_D r_tau^D.
inline EquimeasurabilityReport equimeasurability(const GridFunction& f, const WeightSpec& spec,
                                                 const GeometricConstants& consts, std::size_t radial_n = 512) {
    const RadialProfile U = radial_rearrangement(f, spec, consts, radial_n);
    EquimeasurabilityReport rep;
    rep.thresholds = default_thresholds(f);
    const StepDistribution a = distribution(f, spec, rep.thresholds);
    rep.measure_original = a.measures;
    rep.measure_rearranged.reserve(rep.thresholds.size());
    for (double tau : rep.thresholds)
        rep.measure_rearranged.push_back(consts.unit_ball_measure * std::pow(U.superlevel_radius(tau), consts.D));
    rep.support_radius = U.support_radius();
    const double scale = *std::max_element(a.measures.begin(), a.measures.end());
    for (std::size_t i = 0; i < a.measures.size(); ++i)
        rep.sup_relative =
            std::max(rep.sup_relative, std::abs(a.measures[i] - rep.measure_rearranged[i]) / scale);
    return rep;
}

}  // namespace wtm
