//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "ebpc/error.hpp"

namespace ebpc {

enum class DataMode : std::uint8_t {
    fixed_point,
    float_bitwise,    // binary16 patterns coded as unsigned 16-bit integers, lossless
    float_arithmetic, // binary16 subtraction, one plane fewer, not bit-exact
};

enum class BaseMode : std::uint8_t {
    explicit_base, // first word of every block is sent raw
    implicit_base, // last word of the previous block is the base; starts at 0
};

constexpr unsigned ceil_log2(std::uint64_t x) noexcept
{
    return x <= 1 ? 0u : static_cast<unsigned>(std::bit_width(x - 1));
}

struct CodecConfig {
    unsigned word_width = 8;     // m
    unsigned block_size = 8;     // n
    unsigned burst_len_bits = 4; // k
    DataMode data_mode = DataMode::fixed_point;
    BaseMode base_mode = BaseMode::explicit_base;
    bool signed_words = false;   // fixed-point only; deltas taken on sign-extended values

    void validate() const
    {
        if (word_width != 8 && word_width != 16 && word_width != 32)
            throw Error(ErrorKind::invalid_config,
                        "word width must be 8, 16 or 32, got " + std::to_string(word_width));
        if (block_size < 2 || block_size > 64)
            throw Error(ErrorKind::invalid_config,
                        "block size must be in 2..64, got " + std::to_string(block_size));
        if (burst_len_bits < 1 || burst_len_bits > 7)
            throw Error(ErrorKind::invalid_config,
                        "burst length bits must be in 1..7, got " + std::to_string(burst_len_bits));
        if (data_mode != DataMode::fixed_point && word_width != 16)
            throw Error(ErrorKind::invalid_config, "float modes require 16-bit words");
        if (data_mode != DataMode::fixed_point && signed_words)
            throw Error(ErrorKind::invalid_config, "signed words only apply to fixed-point mode");
    }

    bool is_float_arithmetic() const noexcept { return data_mode == DataMode::float_arithmetic; }
    bool is_implicit() const noexcept { return base_mode == BaseMode::implicit_base; }

    std::uint32_t word_mask() const noexcept
    {
        return static_cast<std::uint32_t>(low_mask_u64(word_width));
    }

    // d: deltas per block, which is also the width of every bit-plane.
    unsigned delta_count() const noexcept { return is_implicit() ? block_size : block_size - 1; }

    // P: bit-planes per block (deltas carry one extra bit unless subtracted as floats).
    unsigned plane_count() const noexcept
    {
        return is_float_arithmetic() ? word_width : word_width + 1;
    }

    unsigned run_field_bits() const noexcept { return ceil_log2(word_width); }

    unsigned max_run() const noexcept
    {
        unsigned r = (1u << run_field_bits()) + 1;
        return r < plane_count() ? r : plane_count();
    }

    unsigned single_one_field_bits() const noexcept { return ceil_log2(delta_count()); }

    unsigned two_ones_field_bits() const noexcept
    {
        return delta_count() < 2 ? 0u : ceil_log2(delta_count() - 1);
    }

    std::uint64_t max_zero_burst() const noexcept { return std::uint64_t{1} << burst_len_bits; }

    friend bool operator==(const CodecConfig&, const CodecConfig&) = default;

private:
    static constexpr std::uint64_t low_mask_u64(unsigned width) noexcept
    {
        return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
    }
};

constexpr std::string_view to_string(BaseMode mode) noexcept
{
    return mode == BaseMode::explicit_base ? "explicit" : "implicit";
}

constexpr std::string_view to_string(DataMode mode) noexcept
{
    switch (mode) {
    case DataMode::fixed_point: return "fixed";
    case DataMode::float_bitwise: return "float-bitwise";
    case DataMode::float_arithmetic: return "float-arith";
    }
    return "?";
}

} // namespace ebpc
