#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "arms/errors.hpp"

namespace arms {

/// Signed 32-bit fixed point with eight fractional bits: value = raw / 256.
/// Resolution 2^-8, round-to-nearest conversion error at most 2^-9.
struct FixedQ24_8 {
    std::int32_t raw = 0;

    static constexpr int kFracBits = 8;
    static constexpr std::int64_t kOne = 1 << kFracBits;

    static FixedQ24_8 from_raw(std::int32_t r) { return FixedQ24_8{r}; }

    static FixedQ24_8 from_real(double v) {
        const double scaled = v * kOne;
        std::int64_t r;
        if (scaled >= static_cast<double>(std::numeric_limits<std::int32_t>::max()))
            r = std::numeric_limits<std::int32_t>::max();
        else if (scaled <= static_cast<double>(std::numeric_limits<std::int32_t>::min()))
            r = std::numeric_limits<std::int32_t>::min();
        else
            r = std::llround(scaled);
        return FixedQ24_8{static_cast<std::int32_t>(r)};
    }

    /// Q24.8 quotient of an integer sum and a positive count, rounded to
    /// nearest (halves away from zero), computed entirely in integers.
    static FixedQ24_8 from_ratio(std::int64_t numerator, std::int64_t denominator) {
        const std::int64_t scaled = numerator * kOne;
        const std::int64_t half = denominator / 2;
        const std::int64_t q = scaled >= 0 ? (scaled + half) / denominator
                                           : -((-scaled + half) / denominator);
        if (q > std::numeric_limits<std::int32_t>::max() ||
            q < std::numeric_limits<std::int32_t>::min())
            throw AccumulatorOverflowError("fixed-point quotient out of Q24.8 range");
        return FixedQ24_8{static_cast<std::int32_t>(q)};
    }

    double to_real() const { return static_cast<double>(raw) / kOne; }

    friend bool operator==(FixedQ24_8 a, FixedQ24_8 b) { return a.raw == b.raw; }
    friend bool operator<(FixedQ24_8 a, FixedQ24_8 b) { return a.raw < b.raw; }
};

} // namespace arms
