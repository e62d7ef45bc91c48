#pragma once

#include <charconv>
#include <string>

namespace exclab {

/// Shortest general-format text with 17 significant digits, so that the
/// value round-trips exactly. Locale independent.
inline std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

} // namespace exclab
