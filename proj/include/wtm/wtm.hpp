// SPDX-License-Identifier: MIT
#pragma once

#include "wtm/errors.hpp"
#include "wtm/quadrature.hpp"
#include "wtm/weights.hpp"
#include "wtm/grid_function.hpp"
#include "wtm/rearrange.hpp"
#include "wtm/reduction.hpp"
#include "wtm/moser.hpp"
#include "wtm/extremal.hpp"
#include "wtm/fixtures.hpp"
#include "wtm/io.hpp"
