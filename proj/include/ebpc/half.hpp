//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstdint>

namespace ebpc::half {

// IEEE 754 binary16 helpers. Arithmetic goes through double, which holds any
// sum or difference of two binary16 values exactly, so a single rounding step
// gives correctly rounded binary16 results.

inline double to_double(std::uint16_t h) noexcept
{
    const bool negative = (h & 0x8000u) != 0;
    const unsigned exponent = (h >> 10) & 0x1Fu;
    const unsigned fraction = h & 0x3FFu;
    double value;
    if (exponent == 0)
        value = std::ldexp(static_cast<double>(fraction), -24);
    else if (exponent == 31)
        value = fraction == 0 ? INFINITY : NAN;
    else
        value = std::ldexp(static_cast<double>(fraction + 1024), static_cast<int>(exponent) - 25);
    return negative ? -value : value;
}

namespace detail {

inline double round_half_even(double q) noexcept
{
    double r = std::floor(q);
    double diff = q - r;
    if (diff > 0.5 || (diff == 0.5 && std::fmod(r, 2.0) != 0.0))
        r += 1.0;
    return r;
}

} // namespace detail

inline std::uint16_t from_double(double x) noexcept
{
    if (std::isnan(x))
        return 0x7E00;
    const std::uint16_t sign = std::signbit(x) ? 0x8000 : 0;
    const double a = std::fabs(x);
    if (a >= 65520.0)
        return sign | 0x7C00;
    if (a < 0x1p-14) {
        // Subnormal range; a rounded-up 1024 lands on the smallest normal.
        auto q = static_cast<std::uint16_t>(detail::round_half_even(a * 0x1p24));
        return sign | q;
    }
    int e2;
    std::frexp(a, &e2);
    int exponent = e2 - 1;
    double mant = detail::round_half_even(std::ldexp(a, 10 - exponent));
    if (mant >= 2048.0) {
        mant = 1024.0;
        ++exponent;
    }
    if (exponent + 15 >= 31)
        return sign | 0x7C00;
    return sign | static_cast<std::uint16_t>(((exponent + 15) << 10) | (static_cast<unsigned>(mant) - 1024));
}

inline std::uint16_t subtract(std::uint16_t a, std::uint16_t b) noexcept
{
    return from_double(to_double(a) - to_double(b));
}

inline std::uint16_t add(std::uint16_t a, std::uint16_t b) noexcept
{
    return from_double(to_double(a) + to_double(b));
}

inline bool is_finite(std::uint16_t h) noexcept { return ((h >> 10) & 0x1Fu) != 31; }

} // namespace ebpc::half
