#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace subcap {

/// log(1 + e^x) without overflow for large x or loss of precision for very negative x.
inline double softplus(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// sin(pi x) with exact zeros at integers and exact +-1 at half integers.
inline double sin_pi(double x)
{
    double r = std::fmod(x, 2.0);
    if (r < 0.0)
        r += 2.0;
    double sign = 1.0;
    if (r >= 1.0) {
        r -= 1.0;
        sign = -1.0;
    }
    if (r > 0.5)
        r = 1.0 - r;
    return sign * std::sin(std::numbers::pi * r);
}

inline double cos_pi(double x) { return sin_pi(x + 0.5); }

// floor/ceil that snap values within a few ulps of an integer onto it, so
// that e.g. 0.3 * 10 is treated as 3.
inline double snapped(double x)
{
    const double r = std::round(x);
    return std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x)) ? r : x;
}
inline std::size_t snapped_floor(double x) { return static_cast<std::size_t>(std::floor(snapped(x))); }
inline std::size_t snapped_ceil(double x) { return static_cast<std::size_t>(std::ceil(snapped(x))); }

} // namespace subcap
