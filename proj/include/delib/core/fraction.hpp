#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace delib::core {

// Exact rational arithmetic for agreement levels, confidence and payoffs.
// Levels are counts over small agent populations, so int64 never overflows.
using Fraction = boost::rational<std::int64_t>;

// Parses a plain decimal literal ("0.5", "-3.25", "42") into an exact
// fraction. Throws std::invalid_argument on anything else.
Fraction fraction_from_decimal(std::string_view text);

// Fixed-point rendering with `digits` fractional digits, round-half-up.
// Used for table output where byte-stable formatting matters.
std::string fraction_to_decimal(const Fraction& f, int digits = 6);

double fraction_to_double(const Fraction& f);

}  // namespace delib::core
