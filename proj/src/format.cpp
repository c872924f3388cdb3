#include "coalesce/format.hpp"

#include <array>
#include <charconv>

#include "coalesce/errors.hpp"

namespace coalesce
{
namespace
{
std::string_view trim(std::string_view s)
{
    auto const first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    auto const last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}
}  // namespace

std::string format_double(double value)
{
    std::array<char, 32> buf;
    auto const [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

double parse_double(std::string_view text, std::string_view what)
{
    auto const s = trim(text);
    double value = 0;
    auto const* first = s.data();
    if (!s.empty() && s.front() == '+')
        ++first;
    auto const [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
    return value;
}

long long parse_integer(std::string_view text, std::string_view what)
{
    auto const s = trim(text);
    long long value = 0;
    auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
    return value;
}
}  // namespace coalesce
