#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace cls {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_exact(double v);

/// `v` rounded to two decimal places, trailing zeros dropped ("12.3", "5", "-0.25").
std::string format_2dp(double v);

/// Strict decimal parse of the whole of `s`; rejects partial parses and non-finite values.
std::optional<double> parse_number(std::string_view s);

/// Strict integer parse of the whole of `s`.
std::optional<long long> parse_integer(std::string_view s);

}  // namespace cls
