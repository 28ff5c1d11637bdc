//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "ebpc/bitio.hpp"
#include "ebpc/config.hpp"
#include "ebpc/transform.hpp"

namespace ebpc {

// Plane patterns in matching precedence order.
enum class SymbolKind : std::uint8_t {
    multi_all_zero_dbx,
    all_zero_dbx,
    all_one_dbx,
    all_zero_dbp,
    two_consec_ones,
    single_one,
    uncompressed,
};

inline constexpr std::size_t kSymbolKindCount = 7;

constexpr std::string_view to_string(SymbolKind kind) noexcept
{
    switch (kind) {
    case SymbolKind::multi_all_zero_dbx: return "multi_all_zero_dbx";
    case SymbolKind::all_zero_dbx: return "all_zero_dbx";
    case SymbolKind::all_one_dbx: return "all_one_dbx";
    case SymbolKind::all_zero_dbp: return "all_zero_dbp";
    case SymbolKind::two_consec_ones: return "two_consec_ones";
    case SymbolKind::single_one: return "single_one";
    case SymbolKind::uncompressed: return "uncompressed";
    }
    return "?";
}

struct PlaneSymbol {
    SymbolKind kind = SymbolKind::uncompressed;
    unsigned run_length = 1; // planes covered; >1 only for multi_all_zero_dbx
    unsigned position = 0;   // delta index of the (first) one
    std::uint64_t payload = 0; // raw DBX word for uncompressed

    friend bool operator==(const PlaneSymbol&, const PlaneSymbol&) = default;
};

inline unsigned code_length(const PlaneSymbol& symbol, const CodecConfig& config) noexcept
{
    switch (symbol.kind) {
    case SymbolKind::multi_all_zero_dbx: return 3 + config.run_field_bits();
    case SymbolKind::all_zero_dbx: return 2;
    case SymbolKind::all_one_dbx: return 5;
    case SymbolKind::all_zero_dbp: return 5;
    case SymbolKind::two_consec_ones: return 5 + config.two_ones_field_bits();
    case SymbolKind::single_one: return 5 + config.single_one_field_bits();
    case SymbolKind::uncompressed: return 1 + config.delta_count();
    }
    return 0;
}

// Per-kind symbol counts gathered while encoding.
struct SymbolStats {
    std::array<std::uint64_t, kSymbolKindCount> counts{};
    std::uint64_t blocks = 0;
    std::uint64_t planes_covered = 0;
    std::uint64_t code_bits = 0;

    void record(const PlaneSymbol& symbol, const CodecConfig& config) noexcept
    {
        ++counts[static_cast<std::size_t>(symbol.kind)];
        planes_covered += symbol.run_length;
        code_bits += code_length(symbol, config);
    }

    std::uint64_t count(SymbolKind kind) const noexcept { return counts[static_cast<std::size_t>(kind)]; }

    std::uint64_t total_symbols() const noexcept
    {
        std::uint64_t total = 0;
        for (auto c : counts)
            total += c;
        return total;
    }
};

// Symbol for plane `plane` (scanning downwards from the MSB plane), first
// matching rule wins.
inline PlaneSymbol classify_plane(const PlaneSet& planes, unsigned plane, const CodecConfig& config) noexcept
{
    const std::uint64_t dbx = planes.dbx[plane];
    const std::uint64_t full = low_mask(planes.width);
    PlaneSymbol symbol;
    if (dbx == 0) {
        unsigned run = 1;
        const unsigned limit = config.max_run();
        while (run < limit && run <= plane && planes.dbx[plane - run] == 0)
            ++run;
        symbol.kind = run >= 2 ? SymbolKind::multi_all_zero_dbx : SymbolKind::all_zero_dbx;
        symbol.run_length = run;
        return symbol;
    }
    if (dbx == full) {
        symbol.kind = SymbolKind::all_one_dbx;
        return symbol;
    }
    if (planes.dbp[plane] == 0) {
        symbol.kind = SymbolKind::all_zero_dbp;
        return symbol;
    }
    const int ones = std::popcount(dbx);
    const unsigned first_one = planes.width - static_cast<unsigned>(std::bit_width(dbx));
    if (ones == 2 && (dbx & (dbx >> 1)) != 0) {
        symbol.kind = SymbolKind::two_consec_ones;
        symbol.position = first_one;
        return symbol;
    }
    if (ones == 1) {
        symbol.kind = SymbolKind::single_one;
        symbol.position = first_one;
        return symbol;
    }
    symbol.kind = SymbolKind::uncompressed;
    symbol.payload = dbx;
    return symbol;
}

inline void write_symbol(BitWriter& writer, const PlaneSymbol& symbol, const CodecConfig& config)
{
    switch (symbol.kind) {
    case SymbolKind::multi_all_zero_dbx:
        writer.write_bits(0b001, 3);
        writer.write_bits(symbol.run_length - 2, config.run_field_bits());
        break;
    case SymbolKind::all_zero_dbx: writer.write_bits(0b01, 2); break;
    case SymbolKind::all_one_dbx: writer.write_bits(0b00000, 5); break;
    case SymbolKind::all_zero_dbp: writer.write_bits(0b00001, 5); break;
    case SymbolKind::two_consec_ones:
        writer.write_bits(0b00010, 5);
        writer.write_bits(symbol.position, config.two_ones_field_bits());
        break;
    case SymbolKind::single_one:
        writer.write_bits(0b00011, 5);
        writer.write_bits(symbol.position, config.single_one_field_bits());
        break;
    case SymbolKind::uncompressed:
        writer.write_bit(true);
        writer.write_bits(symbol.payload, config.delta_count());
        break;
    }
}

// Emits the symbols of one block's planes, MSB plane first.
inline void encode_planes(const PlaneSet& planes, BitWriter& writer, const CodecConfig& config,
                          SymbolStats* stats = nullptr)
{
    unsigned remaining = planes.plane_count;
    while (remaining > 0) {
        const PlaneSymbol symbol = classify_plane(planes, remaining - 1, config);
        write_symbol(writer, symbol, config);
        if (stats)
            stats->record(symbol, config);
        remaining -= symbol.run_length;
    }
    if (stats)
        ++stats->blocks;
}

// Parses one symbol; `planes_left` bounds the run length a symbol may claim.
inline PlaneSymbol read_symbol(BitReader& reader, const CodecConfig& config, unsigned planes_left)
{
    const std::uint64_t start = reader.position();
    const unsigned d = config.delta_count();
    PlaneSymbol symbol;
    if (reader.read_bit()) {
        symbol.kind = SymbolKind::uncompressed;
        symbol.payload = reader.read_bits(d);
        return symbol;
    }
    if (reader.read_bit()) {
        symbol.kind = SymbolKind::all_zero_dbx;
        return symbol;
    }
    if (reader.read_bit()) {
        symbol.kind = SymbolKind::multi_all_zero_dbx;
        symbol.run_length = static_cast<unsigned>(reader.read_bits(config.run_field_bits())) + 2;
        if (symbol.run_length > config.max_run() || symbol.run_length > planes_left)
            throw Error(ErrorKind::malformed_stream,
                        "zero-plane run of " + std::to_string(symbol.run_length) + " overshoots " +
                            std::to_string(planes_left) + " remaining planes",
                        start);
        return symbol;
    }
    switch (reader.read_bits(2)) {
    case 0b00: symbol.kind = SymbolKind::all_one_dbx; break;
    case 0b01: symbol.kind = SymbolKind::all_zero_dbp; break;
    case 0b10:
        symbol.kind = SymbolKind::two_consec_ones;
        symbol.position = static_cast<unsigned>(reader.read_bits(config.two_ones_field_bits()));
        if (d < 2 || symbol.position > d - 2)
            throw Error(ErrorKind::malformed_stream,
                        "two-ones position " + std::to_string(symbol.position) + " out of range", start);
        break;
    default:
        symbol.kind = SymbolKind::single_one;
        symbol.position = static_cast<unsigned>(reader.read_bits(config.single_one_field_bits()));
        if (symbol.position >= d)
            throw Error(ErrorKind::malformed_stream,
                        "single-one position " + std::to_string(symbol.position) + " out of range", start);
        break;
    }
    return symbol;
}

// Reads symbols until all plane_count planes of one block are rebuilt.
// Returns both DBX and DBP views.
inline PlaneSet decode_plane_symbols(BitReader& reader, const CodecConfig& config)
{
    PlaneSet planes;
    planes.plane_count = config.plane_count();
    planes.width = config.delta_count();
    const unsigned d = planes.width;
    const std::uint64_t full = low_mask(d);
    std::uint64_t prev = 0;
    unsigned remaining = planes.plane_count;
    while (remaining > 0) {
        const PlaneSymbol symbol = read_symbol(reader, config, remaining);
        if (symbol.kind == SymbolKind::all_zero_dbp) {
            --remaining;
            planes.dbp[remaining] = 0;
            planes.dbx[remaining] = prev;
            prev = 0;
            continue;
        }
        std::uint64_t dbx = 0;
        switch (symbol.kind) {
        case SymbolKind::all_one_dbx: dbx = full; break;
        case SymbolKind::two_consec_ones: dbx = std::uint64_t{0b11} << (d - 2 - symbol.position); break;
        case SymbolKind::single_one: dbx = std::uint64_t{1} << (d - 1 - symbol.position); break;
        case SymbolKind::uncompressed: dbx = symbol.payload; break;
        default: break;
        }
        for (unsigned r = 0; r < symbol.run_length; ++r) {
            --remaining;
            planes.dbx[remaining] = dbx;
            planes.dbp[remaining] = dbx ^ prev;
            prev = planes.dbp[remaining];
        }
    }
    return planes;
}

} // namespace ebpc
