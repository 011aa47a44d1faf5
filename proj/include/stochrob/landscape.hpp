#pragma once

#include <string>

#include "stochrob/robustness.hpp"

namespace stochrob {

// Landscape document; no timing data so equal runs give equal bytes.
std::string landscape_json(const RobustnessResult& res, const PiecewiseEstimate* piecewise = nullptr);
// One box per row: <dim>_lo, <dim>_hi for every dimension, then d_lo, d_hi.
std::string landscape_csv(const RobustnessResult& res);

}  // namespace stochrob
