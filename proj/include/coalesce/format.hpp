#pragma once

#include <string>
#include <string_view>

namespace coalesce
{
/// Shortest round-trip decimal form, independent of the global locale.
std::string format_double(double value);

/// Parse a full C-locale decimal; throws ConfigError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what = "value");
long long parse_integer(std::string_view text, std::string_view what = "value");
}  // namespace coalesce
