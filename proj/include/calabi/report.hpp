#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace calabi {

/// Fixed 15-significant-digit rendering used by every CSV and JSON writer.
inline std::string fmt15(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

/// x rounded to 15 significant digits.
inline double round15(double x) {
    if (!std::isfinite(x)) return x;
    return std::strtod(fmt15(x).c_str(), nullptr);
}

}  // namespace calabi
