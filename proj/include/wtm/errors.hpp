// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace wtm {

enum class Errc {
    invalid_spec,
    point_outside_cone,
    budget_too_small,
    nonpositive_radius,
    empty_thresholds,
    invalid_thresholds,
    nonpositive_measure,
    zero_function,
    nonincreasing_psi,
    exponent_out_of_range,
    increasing_profile,
    invalid_profile,
    mismatched_profiles,
    coefficient_out_of_range,
    breakpoint_out_of_range,
    invalid_problem,
    non_convergence,
    exponent_mismatch,
    invalid_grid,
    io_error,
};

/// Error carrying a machine-checkable code next to the human message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace wtm
