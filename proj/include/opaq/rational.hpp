#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace opaq {

/// Exact arbitrary-precision rational used for every probability in the core.
using Rational = mpq_class;

/// Parses "p/q" or "p" (optionally with surrounding blanks). Throws
/// std::invalid_argument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" rendering; integers are printed as "p/1".
std::string to_string(const Rational& value);

}  // namespace opaq
