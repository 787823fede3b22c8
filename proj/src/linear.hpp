#pragma once

#include "opaq/rational.hpp"

#include <vector>

namespace opaq::detail {

/// Solves A x = b exactly by Gaussian elimination with rational pivots.
/// A must be square and non-singular; throws std::runtime_error otherwise.
std::vector<Rational> solve_linear(std::vector<std::vector<Rational>> a, std::vector<Rational> b);

}  // namespace opaq::detail
