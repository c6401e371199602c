// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wtm/errors.hpp"
#include "wtm/grid_function.hpp"
#include "wtm/weights.hpp"

namespace wtm::fixtures {

/// w(x) = x_1 on {x_1 > 0} in R^2.
inline WeightSpec weight_x1() { return WeightSpec(ConeSpec(2, {0}), {1.0}); }

/// w(x) = x_1 x_2 on the positive quadrant.
inline WeightSpec weight_x1x2() { return WeightSpec(ConeSpec(2, {0, 1}), {1.0, 1.0}); }

enum class Kind { radial_bump, shifted_bump, two_bumps };

inline constexpr Kind kAllKinds[] = {Kind::radial_bump, Kind::shifted_bump, Kind::two_bumps};

inline std::string_view name(Kind k) {
    switch (k) {
        case Kind::radial_bump: return "radial_bump";
        case Kind::shifted_bump: return "shifted_bump";
        case Kind::two_bumps: return "two_bumps";
    }
    return "";
}

inline std::optional<Kind> parse_kind(std::string_view s) {
    for (Kind k : kAllKinds)
        if (name(k) == s) return k;
    return std::nullopt;
}

/// h (1 - |x - c|^2 / rho^2)^2 inside the ball, 0 outside.
inline double bump(std::span<const double> x, std::span<const double> c, double rho, double h) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - c[k]) * (x[k] - c[k]);
    const double s = r2 / (rho * rho);
    return s < 1.0 ? h * (1.0 - s) * (1.0 - s) : 0.0;
}

/// Box [0, L] on active axes and [-L, L] on the others.
inline Box fixture_box(const ConeSpec& cone, double L = 1.5) {
    Box b;
    for (int k = 0; k < cone.dimension(); ++k) {
        b.lower.push_back(cone.is_active(k) ? 0.0 : -L);
        b.upper.push_back(L);
    }
    return b;
}

/**
 * Canonical test functions sampled with n nodes per axis.
 *  radial_bump: (1 - |x|^2)^2, radial about the vertex.
 *  shifted_bump: the radial bump moved by 0.3 along every inactive axis. The
 *    weight does not depend on those axes, so the rearrangement is unchanged.
 *    Cones without inactive axes get a bump of radius 0.5 inside the cone.
 *  two_bumps: bumps of heights 1 and 0.6 with disjoint supports in the cone.
 */
inline GridFunction make(Kind kind, const WeightSpec& spec, std::size_t n) {
    const ConeSpec& cone = spec.cone();
    const std::size_t d = static_cast<std::size_t>(cone.dimension());
    const Box box = fixture_box(cone);
    const std::vector<std::size_t> shape(d, n);
    std::vector<double> zero(d, 0.0);
    switch (kind) {
        case Kind::radial_bump:
            return GridFunction::sample(box, shape, [&](std::span<const double> x) { return bump(x, zero, 1.0, 1.0); });
        case Kind::shifted_bump: {
            std::vector<double> c(d, 0.0);
            double rho = 1.0;
            if (cone.active().size() == d) {
                c.assign(d, 0.75);
                rho = 0.5;
            } else {
                for (std::size_t k = 0; k < d; ++k)
                    if (!cone.is_active(static_cast<int>(k))) c[k] = 0.3;
            }
            return GridFunction::sample(box, shape, [&](std::span<const double> x) { return bump(x, c, rho, 1.0); });
        }
        case Kind::two_bumps: {
            std::vector<double> c1(d, 0.5), c2(d, 0.5);
            c1[1] = cone.is_active(1) ? 1.0 : -0.6;
            c2[1] = cone.is_active(1) ? 0.35 : 0.6;
            c2[0] = cone.is_active(1) ? 1.05 : 0.5;
            return GridFunction::sample(box, shape, [&](std::span<const double> x) {
                return bump(x, c1, 0.4, 1.0) + bump(x, c2, 0.3, 0.6);
            });
        }
    }
    throw Error(Errc::invalid_spec, "unknown fixture");
}

}  // namespace wtm::fixtures
