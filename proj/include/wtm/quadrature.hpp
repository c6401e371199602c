// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace wtm {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    /// Nodes and weights transported to [a, b].
    std::pair<std::vector<double>, std::vector<double>> mapped(double a, double b) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (b + a);
        std::vector<double> x(nodes.size()), w(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            x[i] = mid + half * nodes[i];
            w[i] = half * weights[i];
        }
        return {std::move(x), std::move(w)};
    }
};

/// Newton iteration on the three-term recurrence; converges to machine
/// precision from the Chebyshev initial guess for every n used here.
inline GaussRule gauss_legendre(std::size_t n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double kk = static_cast<double>(k);
            const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
            p0 = p1;
            p1 = p2;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

/// Fixed-order pairwise summation. The result depends only on the input
/// order, never on scheduling.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/**
 * Hyperspherical chart of the unit sphere portion lying in an orthant-type
 * cone {x_j > 0, j in J}.
 *
 *   x_1     = cos(th_1)
 *   x_k     = sin(th_1)...sin(th_{k-1}) cos(th_k),      k <= d-2
 *   x_{d-1} = sin(th_1)...sin(th_{d-2}) cos(phi)
 *   x_d     = sin(th_1)...sin(th_{d-2}) sin(phi)
 *
 * Each active constraint becomes an interval constraint on a single angle,
 * so the cone's angular domain is an axis-aligned box and tensor rules align
 * with its boundary.
 */
class SphereChart {
public:
    SphereChart(int dimension, const std::vector<bool>& active) : d_(dimension) {
        using std::numbers::pi;
        for (int k = 0; k + 2 < d_; ++k) {
            if (active[static_cast<std::size_t>(k)])
                bounds_.push_back({0.0, pi / 2});
            else
                bounds_.push_back({0.0, pi});
        }
        const bool a = active[static_cast<std::size_t>(d_ - 2)];
        const bool b = active[static_cast<std::size_t>(d_ - 1)];
        if (a && b)
            bounds_.push_back({0.0, pi / 2});
        else if (a)
            bounds_.push_back({-pi / 2, pi / 2});
        else if (b)
            bounds_.push_back({0.0, pi});
        else
            bounds_.push_back({-pi, pi});
    }

    int dimension() const { return d_; }
    const std::vector<std::array<double, 2>>& bounds() const { return bounds_; }

    /// Unit vector for the given angles; returns the surface Jacobian.
    double point(std::span<const double> angles, std::span<double> x) const {
        double sines = 1.0;
        double jac = 1.0;
        const int m = d_ - 2;
        for (int k = 0; k < m; ++k) {
            const double th = angles[static_cast<std::size_t>(k)];
            x[static_cast<std::size_t>(k)] = sines * std::cos(th);
            const double s = std::sin(th);
            jac *= std::pow(s, static_cast<double>(m - k));
            sines *= s;
        }
        const double ph = angles[static_cast<std::size_t>(m)];
        x[static_cast<std::size_t>(d_ - 2)] = sines * std::cos(ph);
        x[static_cast<std::size_t>(d_ - 1)] = sines * std::sin(ph);
        return jac;
    }

    /// Calls visit(x, weight) for every node of the n-point-per-angle tensor
    /// Gauss-Legendre rule on the angular box.
    template <typename Visit>
    void for_each_node(std::size_t n, Visit&& visit) const {
        const GaussRule rule = gauss_legendre(n);
        const std::size_t m = bounds_.size();
        std::vector<std::vector<double>> xs(m), ws(m);
        for (std::size_t k = 0; k < m; ++k) {
            auto [x, w] = rule.mapped(bounds_[k][0], bounds_[k][1]);
            xs[k] = std::move(x);
            ws[k] = std::move(w);
        }
        std::vector<std::size_t> idx(m, 0);
        std::vector<double> angles(m), point_buf(static_cast<std::size_t>(d_));
        while (true) {
            double w = 1.0;
            for (std::size_t k = 0; k < m; ++k) {
                angles[k] = xs[k][idx[k]];
                w *= ws[k][idx[k]];
            }
            const double jac = point(angles, point_buf);
            visit(std::span<const double>(point_buf), w * jac);
            std::size_t k = 0;
            while (k < m && ++idx[k] == n) idx[k++] = 0;
            if (k == m) break;
        }
    }

private:
    int d_;
    std::vector<std::array<double, 2>> bounds_;
};

}  // namespace wtm
