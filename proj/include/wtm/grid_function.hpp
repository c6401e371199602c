// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wtm/errors.hpp"
#include "wtm/weights.hpp"

namespace wtm {

/// Axis-aligned box [lower_k, upper_k].
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dimension() const { return lower.size(); }
    friend bool operator==(const Box&, const Box&) = default;
};

/**
 * Samples of a compactly supported function on a uniform tensor grid over a
 * box, extended by zero outside. Storage is column-major: axis 0 varies
 * fastest.
 */
class GridFunction {
public:
    static constexpr std::size_t kMinNodesPerAxis = 8;

    GridFunction(Box box, std::vector<std::size_t> shape, std::vector<double> values)
        : box_(std::move(box)), shape_(std::move(shape)), values_(std::move(values)) {
        const std::size_t d = shape_.size();
        if (d < 1 || box_.lower.size() != d || box_.upper.size() != d)
            throw Error(Errc::invalid_grid, "box and shape dimensions disagree");
        std::size_t total = 1;
        for (std::size_t k = 0; k < d; ++k) {
            if (shape_[k] < kMinNodesPerAxis)
                throw Error(Errc::invalid_grid, "at least 8 nodes per axis are required");
            if (!(box_.upper[k] > box_.lower[k]))
                throw Error(Errc::invalid_grid, "box must have positive extent on every axis");
            total *= shape_[k];
        }
        if (values_.size() != total) throw Error(Errc::invalid_grid, "sample count does not match the shape");
        if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); }))
            throw Error(Errc::invalid_grid, "samples must be finite");
        strides_.resize(d);
        std::size_t s = 1;
        for (std::size_t k = 0; k < d; ++k) {
            strides_[k] = s;
            s *= shape_[k];
        }
    }

    /// Samples f at every node.
    template <typename F>
    static GridFunction sample(const Box& box, const std::vector<std::size_t>& shape, F&& f) {
        std::size_t total = 1;
        for (auto n : shape) total *= n;
        std::vector<double> values(total);
        std::vector<double> x(shape.size());
        std::vector<std::size_t> idx(shape.size(), 0);
        for (std::size_t flat = 0; flat < total; ++flat) {
            for (std::size_t k = 0; k < shape.size(); ++k)
                x[k] = box.lower[k] + (box.upper[k] - box.lower[k]) * static_cast<double>(idx[k]) /
                                          static_cast<double>(shape[k] - 1);
            values[flat] = f(std::span<const double>(x));
            for (std::size_t k = 0; k < shape.size() && ++idx[k] == shape[k]; ++k) idx[k] = 0;
        }
        return GridFunction(box, shape, std::move(values));
    }

    std::size_t dimension() const { return shape_.size(); }
    const Box& box() const { return box_; }
    const std::vector<std::size_t>& shape() const { return shape_; }
    const std::vector<std::size_t>& strides() const { return strides_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    double spacing(std::size_t axis) const {
        return (box_.upper[axis] - box_.lower[axis]) / static_cast<double>(shape_[axis] - 1);
    }

    double coordinate(std::size_t axis, std::size_t i) const {
        if (i + 1 == shape_[axis]) return box_.upper[axis];
        return box_.lower[axis] + spacing(axis) * static_cast<double>(i);
    }

    /// Multi-index of a flat position.
    std::vector<std::size_t> unflatten(std::size_t flat) const {
        std::vector<std::size_t> idx(shape_.size());
        for (std::size_t k = 0; k < shape_.size(); ++k) {
            idx[k] = flat % shape_[k];
            flat /= shape_[k];
        }
        return idx;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    friend bool operator==(const GridFunction&, const GridFunction&) = default;

private:
    Box box_;
    std::vector<std::size_t> shape_;
    std::vector<std::size_t> strides_;
    std::vector<double> values_;
};

/// The box must lie in the cone closure, and samples must vanish on every box
/// face except the faces lying on the cone boundary (x_j = 0, j active): the
/// functions are compactly supported in R^d, not in the open cone.
inline void require_compact_support(const GridFunction& f, const WeightSpec& spec) {
    const std::size_t d = f.dimension();
    if (d != static_cast<std::size_t>(spec.dimension()))
        throw Error(Errc::invalid_grid, "grid dimension does not match the weight");
    for (int j : spec.cone().active())
        if (f.box().lower[static_cast<std::size_t>(j)] < 0.0)
            throw Error(Errc::invalid_grid, "grid box leaves the cone closure");
    const double tol = 1e-12 * std::max(1.0, f.max_abs());
    const auto vals = f.values();
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        if (std::abs(vals[flat]) <= tol) continue;
        const auto idx = f.unflatten(flat);
        for (std::size_t k = 0; k < d; ++k) {
            const bool on_cone_face = idx[k] == 0 && spec.cone().is_active(static_cast<int>(k)) &&
                                      f.box().lower[k] == 0.0;
            if ((idx[k] == 0 && !on_cone_face) || idx[k] + 1 == f.shape()[k])
                throw Error(Errc::invalid_grid, "samples must vanish on the box boundary");
        }
    }
}

/**
 * Weighted mass attached to each node: every cell hands 1/2^d of its exact
 * weighted mass to each of its corners. The monomial weight and the box are
 * separable, so the node mass is a product of per-axis factors.
 */
inline std::vector<double> node_masses(const GridFunction& f, const WeightSpec& spec) {
    const std::size_t d = f.dimension();
    std::vector<std::vector<double>> axis_mass(d);
    for (std::size_t k = 0; k < d; ++k) {
        const std::size_t n = f.shape()[k];
        std::vector<double> cell(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            cell[i] = spec.axis_integral(static_cast<int>(k), f.coordinate(k, i), f.coordinate(k, i + 1));
        auto& m = axis_mass[k];
        m.assign(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            m[i] += 0.5 * cell[i];
            m[i + 1] += 0.5 * cell[i];
        }
    }
    std::vector<double> mass(f.size());
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        double m = 1.0;
        for (std::size_t k = 0; k < d; ++k) m *= axis_mass[k][idx[k]];
        mass[flat] = m;
        for (std::size_t k = 0; k < d && ++idx[k] == f.shape()[k]; ++k) idx[k] = 0;
    }
    return mass;
}

}  // namespace wtm
