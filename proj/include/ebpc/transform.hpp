//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ebpc/config.hpp"
#include "ebpc/half.hpp"

namespace ebpc {

inline constexpr unsigned kMaxBlockSize = 64;
inline constexpr unsigned kMaxPlanes = 33;

// Base word plus the deltas of one block. In fixed-point and float-bitwise
// modes a delta is the exact integer difference (fits m+1 bits two's
// complement); in float-arithmetic mode it is the binary16 pattern of the
// rounded difference.
struct DeltaBlock {
    std::optional<std::uint32_t> base;
    unsigned count = 0;
    std::array<std::int64_t, kMaxBlockSize> deltas{};

    std::span<const std::int64_t> values() const noexcept { return {deltas.data(), count}; }

    friend bool operator==(const DeltaBlock& a, const DeltaBlock& b) noexcept
    {
        if (a.base != b.base || a.count != b.count)
            return false;
        for (unsigned i = 0; i < a.count; ++i)
            if (a.deltas[i] != b.deltas[i])
                return false;
        return true;
    }
};

// DBP and DBX views of a block. Plane j collects bit j of every delta.
// Delta index i sits at bit (width - 1 - i) of the plane word, so the oldest
// delta is the most significant bit and a plane can be emitted with one
// MSB-first write.
struct PlaneSet {
    unsigned plane_count = 0;
    unsigned width = 0;
    std::array<std::uint64_t, kMaxPlanes> dbp{};
    std::array<std::uint64_t, kMaxPlanes> dbx{};

    bool dbp_bit(unsigned plane, unsigned delta_index) const noexcept
    {
        return (dbp[plane] >> (width - 1 - delta_index)) & 1;
    }
    bool dbx_bit(unsigned plane, unsigned delta_index) const noexcept
    {
        return (dbx[plane] >> (width - 1 - delta_index)) & 1;
    }
};

namespace detail {

inline std::int64_t as_integer(std::uint32_t word, const CodecConfig& config) noexcept
{
    if (config.signed_words) {
        const std::uint64_t sign = std::uint64_t{1} << (config.word_width - 1);
        return static_cast<std::int64_t>((std::uint64_t{word} ^ sign)) - static_cast<std::int64_t>(sign);
    }
    return static_cast<std::int64_t>(word);
}

inline std::uint32_t apply_delta(std::uint32_t prev, std::int64_t delta, const CodecConfig& config) noexcept
{
    if (config.is_float_arithmetic())
        return half::add(static_cast<std::uint16_t>(prev), static_cast<std::uint16_t>(delta));
    return static_cast<std::uint32_t>((std::uint64_t{prev} + static_cast<std::uint64_t>(delta)) &
                                      config.word_mask());
}

} // namespace detail

// `words` must hold exactly block_size words. `prev` is the (decoder-side)
// last word of the preceding block and only matters in implicit mode.
// Float-arithmetic deltas are taken against the running reconstruction, so
// rounding errors never accumulate across a block.
inline DeltaBlock delta_forward(std::span<const std::uint32_t> words, std::uint32_t prev,
                                const CodecConfig& config)
{
    if (words.size() != config.block_size)
        throw Error(ErrorKind::contract_violation, "block must hold exactly block_size words");
    DeltaBlock block;
    std::size_t first = 0;
    if (!config.is_implicit()) {
        block.base = words[0];
        prev = words[0];
        first = 1;
    }
    block.count = 0;
    if (config.is_float_arithmetic()) {
        for (std::size_t i = first; i < words.size(); ++i) {
            auto d = half::subtract(static_cast<std::uint16_t>(words[i]), static_cast<std::uint16_t>(prev));
            block.deltas[block.count++] = d;
            prev = detail::apply_delta(prev, d, config);
        }
    } else {
        std::int64_t last = detail::as_integer(prev, config);
        for (std::size_t i = first; i < words.size(); ++i) {
            std::int64_t cur = detail::as_integer(words[i], config);
            block.deltas[block.count++] = cur - last;
            last = cur;
        }
    }
    return block;
}

// Writes block_size words into `out`.
inline void delta_inverse(const DeltaBlock& block, std::uint32_t prev, const CodecConfig& config,
                          std::span<std::uint32_t> out)
{
    if (out.size() != config.block_size)
        throw Error(ErrorKind::contract_violation, "output must hold exactly block_size words");
    std::size_t pos = 0;
    if (!config.is_implicit()) {
        prev = block.base.value_or(0) & config.word_mask();
        out[pos++] = prev;
    }
    for (unsigned i = 0; i < block.count && pos < out.size(); ++i) {
        prev = detail::apply_delta(prev, block.deltas[i], config);
        out[pos++] = prev;
    }
}

inline std::vector<std::uint32_t> delta_inverse(const DeltaBlock& block, std::uint32_t prev,
                                                const CodecConfig& config)
{
    std::vector<std::uint32_t> out(config.block_size);
    delta_inverse(block, prev, config, out);
    return out;
}

inline PlaneSet dbp_dbx_forward(const DeltaBlock& block, const CodecConfig& config) noexcept
{
    PlaneSet planes;
    planes.plane_count = config.plane_count();
    planes.width = block.count;
    for (unsigned i = 0; i < block.count; ++i) {
        const auto bits = static_cast<std::uint64_t>(block.deltas[i]);
        const unsigned shift = block.count - 1 - i;
        for (unsigned j = 0; j < planes.plane_count; ++j)
            planes.dbp[j] |= ((bits >> j) & 1) << shift;
    }
    const unsigned top = planes.plane_count - 1;
    planes.dbx[top] = planes.dbp[top];
    for (unsigned j = 0; j < top; ++j)
        planes.dbx[j] = planes.dbp[j] ^ planes.dbp[j + 1];
    return planes;
}

// Rebuilds DBP planes from DBX planes, scanning MSB to LSB.
inline void dbp_from_dbx(PlaneSet& planes) noexcept
{
    std::uint64_t prev = 0;
    for (unsigned j = planes.plane_count; j-- > 0;) {
        planes.dbp[j] = planes.dbx[j] ^ prev;
        prev = planes.dbp[j];
    }
}

// Deltas from the DBP planes of `planes` (base left empty).
inline DeltaBlock deltas_from_dbp(const PlaneSet& planes, const CodecConfig& config) noexcept
{
    DeltaBlock block;
    block.count = planes.width;
    const unsigned p = planes.plane_count;
    for (unsigned i = 0; i < planes.width; ++i) {
        const unsigned shift = planes.width - 1 - i;
        std::uint64_t raw = 0;
        for (unsigned j = 0; j < p; ++j)
            raw |= ((planes.dbp[j] >> shift) & 1) << j;
        std::int64_t value = static_cast<std::int64_t>(raw);
        if (!config.is_float_arithmetic() && ((raw >> (p - 1)) & 1))
            value -= std::int64_t{1} << p;
        block.deltas[i] = value;
    }
    return block;
}

// Inverse of dbp_dbx_forward given only the DBX planes.
inline DeltaBlock dbp_dbx_inverse(PlaneSet planes, const CodecConfig& config) noexcept
{
    dbp_from_dbx(planes);
    return deltas_from_dbp(planes, config);
}

} // namespace ebpc
