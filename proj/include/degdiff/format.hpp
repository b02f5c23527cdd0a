#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace degdiff {

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) return std::to_string(value);
    std::string out(buf, end);
    // keep floats recognisable as floats in structured text
    if (out.find_first_of(".eE") == std::string::npos) out += ".0";
    return out;
}

}  // namespace degdiff
