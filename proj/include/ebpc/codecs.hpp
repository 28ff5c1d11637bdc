//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ebpc/bitio.hpp"
#include "ebpc/config.hpp"
#include "ebpc/symbol_codec.hpp"
#include "ebpc/transform.hpp"

namespace ebpc {

enum class Codec : std::uint8_t { ebpc = 0, zvc = 1, zero_rle = 2, bpc = 3 };

inline constexpr std::array<Codec, 4> kAllCodecs{Codec::ebpc, Codec::zvc, Codec::zero_rle, Codec::bpc};

constexpr std::string_view to_string(Codec codec) noexcept
{
    switch (codec) {
    case Codec::ebpc: return "ebpc";
    case Codec::zvc: return "zvc";
    case Codec::zero_rle: return "zero-rle";
    case Codec::bpc: return "bpc";
    }
    return "?";
}

inline std::optional<Codec> parse_codec(std::string_view name) noexcept
{
    for (Codec c : kAllCodecs)
        if (to_string(c) == name)
            return c;
    return std::nullopt;
}

// The two output streams of a codec run. ZVC and Zero-RLE put raw non-zero
// words in `data_stream`; plain BPC leaves `zero_stream` empty.
// `nonzero_count` is unknown for streams read back from a file.
struct EncodedStreams {
    BitStream zero_stream;
    BitStream data_stream;
    std::uint64_t word_count = 0;
    std::optional<std::uint64_t> nonzero_count;

    std::uint64_t compressed_bits() const noexcept { return zero_stream.bit_count + data_stream.bit_count; }
};

struct Ratio {
    std::uint64_t uncompressed_bits = 0;
    std::uint64_t compressed_bits = 0;

    double value() const noexcept
    {
        return static_cast<double>(uncompressed_bits) / static_cast<double>(compressed_bits);
    }
};

inline std::uint64_t compressed_size(const EncodedStreams& streams) noexcept { return streams.compressed_bits(); }

// Absent for the empty stream, the only case with zero payload bits.
inline std::optional<Ratio> compression_ratio(const EncodedStreams& streams, const CodecConfig& config) noexcept
{
    if (streams.compressed_bits() == 0)
        return std::nullopt;
    return Ratio{streams.word_count * config.word_width, streams.compressed_bits()};
}

namespace detail {

inline void check_words(std::span<const std::uint32_t> words, const CodecConfig& config)
{
    config.validate();
    const std::uint32_t mask = config.word_mask();
    for (std::size_t i = 0; i < words.size(); ++i)
        if ((words[i] & ~mask) != 0)
            throw Error(ErrorKind::contract_violation,
                        "word " + std::to_string(i) + " does not fit in " +
                            std::to_string(config.word_width) + " bits");
}

inline bool exact_mode(const CodecConfig& config) noexcept { return !config.is_float_arithmetic(); }

} // namespace detail

inline std::vector<std::uint32_t> nonzero_words(std::span<const std::uint32_t> words)
{
    std::vector<std::uint32_t> out;
    out.reserve(words.size());
    for (auto w : words)
        if (w != 0)
            out.push_back(w);
    return out;
}

// ---------------------------------------------------------------------------
// Zero/non-zero run-length code: '1' per non-zero word, '0' + (burst - 1) in
// k bits per zero burst of at most 2^k words.

inline void zero_rle_write(BitWriter& writer, std::span<const std::uint32_t> words, unsigned k)
{
    const std::uint64_t max_burst = std::uint64_t{1} << k;
    std::uint64_t burst = 0;
    auto flush = [&] {
        while (burst > 0) {
            std::uint64_t chunk = std::min(burst, max_burst);
            writer.write_bits(chunk - 1, k + 1); // leading '0' plus length field
            burst -= chunk;
        }
    };
    for (auto w : words) {
        if (w == 0) {
            ++burst;
        } else {
            flush();
            writer.write_bit(true);
        }
    }
    flush();
}

inline BitStream zero_rle_encode(std::span<const std::uint32_t> words, unsigned k)
{
    BitWriter writer;
    zero_rle_write(writer, words, k);
    return writer.finish();
}

// Returns one flag per word (1 = non-zero).
inline std::vector<std::uint8_t> zero_rle_decode(BitReader& reader, std::uint64_t word_count, unsigned k)
{
    std::vector<std::uint8_t> flags;
    flags.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(word_count, reader.remaining() << k)));
    while (flags.size() < word_count) {
        const std::uint64_t at = reader.position();
        if (reader.read_bit()) {
            flags.push_back(1);
            continue;
        }
        const std::uint64_t burst = reader.read_bits(k) + 1;
        if (flags.size() + burst > word_count)
            throw Error(ErrorKind::malformed_stream,
                        "zero burst of " + std::to_string(burst) + " exceeds word count " +
                            std::to_string(word_count),
                        at);
        flags.insert(flags.end(), static_cast<std::size_t>(burst), 0);
    }
    return flags;
}

inline std::vector<std::uint8_t> zero_rle_decode(const BitStream& bits, std::uint64_t word_count, unsigned k)
{
    BitReader reader(bits);
    auto flags = zero_rle_decode(reader, word_count, k);
    reader.expect_padding_only("zero stream");
    return flags;
}

// ---------------------------------------------------------------------------
// Block coder shared by plain BPC and EBPC.

// Codes `values` in blocks of block_size; the last block is padded by
// repeating its final word.
inline void bpc_write_blocks(BitWriter& writer, std::span<const std::uint32_t> values,
                             const CodecConfig& config, SymbolStats* stats = nullptr)
{
    const std::size_t n = config.block_size;
    std::array<std::uint32_t, kMaxBlockSize> block{};
    std::uint32_t prev = 0;
    for (std::size_t start = 0; start < values.size(); start += n) {
        const std::size_t take = std::min(n, values.size() - start);
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(start), take, block.begin());
        std::fill(block.begin() + static_cast<std::ptrdiff_t>(take), block.begin() + static_cast<std::ptrdiff_t>(n),
                  block[take - 1]);
        std::span<const std::uint32_t> words{block.data(), n};
        const DeltaBlock deltas = delta_forward(words, prev, config);
        if (deltas.base)
            writer.write_bits(*deltas.base, config.word_width);
        encode_planes(dbp_dbx_forward(deltas, config), writer, config, stats);
        if (config.is_implicit()) {
            if (config.is_float_arithmetic()) {
                std::array<std::uint32_t, kMaxBlockSize> rebuilt{};
                delta_inverse(deltas, prev, config, {rebuilt.data(), n});
                prev = rebuilt[n - 1];
            } else {
                prev = block[n - 1];
            }
        }
    }
}

// Decodes `count` words (pad words of the final block are dropped).
inline void bpc_read_blocks(BitReader& reader, std::uint64_t count, const CodecConfig& config,
                            std::vector<std::uint32_t>& out)
{
    const std::size_t n = config.block_size;
    std::array<std::uint32_t, kMaxBlockSize> block{};
    std::uint32_t prev = 0;
    std::uint64_t left = count;
    while (left > 0) {
        std::optional<std::uint32_t> base;
        if (!config.is_implicit())
            base = static_cast<std::uint32_t>(reader.read_bits(config.word_width));
        DeltaBlock deltas = deltas_from_dbp(decode_plane_symbols(reader, config), config);
        deltas.base = base;
        delta_inverse(deltas, prev, config, {block.data(), n});
        const std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(left, n));
        out.insert(out.end(), block.begin(), block.begin() + static_cast<std::ptrdiff_t>(take));
        prev = block[n - 1];
        left -= take;
    }
}

// ---------------------------------------------------------------------------
// Stream codecs.

inline EncodedStreams zvc_encode(std::span<const std::uint32_t> words, const CodecConfig& config)
{
    detail::check_words(words, config);
    BitWriter mask;
    BitWriter data;
    std::uint64_t nonzero = 0;
    for (auto w : words) {
        mask.write_bit(w != 0);
        if (w != 0) {
            data.write_bits(w, config.word_width);
            ++nonzero;
        }
    }
    return {mask.finish(), data.finish(), words.size(), nonzero};
}

inline EncodedStreams zero_rle_codec_encode(std::span<const std::uint32_t> words, const CodecConfig& config)
{
    detail::check_words(words, config);
    BitWriter data;
    std::uint64_t nonzero = 0;
    for (auto w : words) {
        if (w != 0) {
            data.write_bits(w, config.word_width);
            ++nonzero;
        }
    }
    return {zero_rle_encode(words, config.burst_len_bits), data.finish(), words.size(), nonzero};
}

inline EncodedStreams bpc_encode_stream(std::span<const std::uint32_t> words, const CodecConfig& config,
                                        SymbolStats* stats = nullptr)
{
    detail::check_words(words, config);
    BitWriter data;
    bpc_write_blocks(data, words, config, stats);
    const auto nonzero = static_cast<std::uint64_t>(std::count_if(words.begin(), words.end(), [](auto w) { return w != 0; }));
    return {BitStream{}, data.finish(), words.size(), nonzero};
}

inline EncodedStreams ebpc_encode(std::span<const std::uint32_t> words, const CodecConfig& config,
                                  SymbolStats* stats = nullptr)
{
    detail::check_words(words, config);
    const std::vector<std::uint32_t> values = nonzero_words(words);
    BitWriter data;
    bpc_write_blocks(data, values, config, stats);
    return {zero_rle_encode(words, config.burst_len_bits), data.finish(), words.size(), values.size()};
}

namespace detail {

inline std::uint64_t count_flags(const std::vector<std::uint8_t>& flags, const EncodedStreams& streams)
{
    const auto ones = static_cast<std::uint64_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
    if (streams.nonzero_count && *streams.nonzero_count != ones)
        throw Error(ErrorKind::flag_count_mismatch,
                    "zero stream marks " + std::to_string(ones) + " non-zero words, expected " +
                        std::to_string(*streams.nonzero_count));
    return ones;
}

inline std::vector<std::uint8_t> read_flags(const EncodedStreams& streams, const CodecConfig& config, bool rle)
{
    BitReader reader(streams.zero_stream);
    std::vector<std::uint8_t> flags;
    if (rle) {
        flags = zero_rle_decode(reader, streams.word_count, config.burst_len_bits);
    } else {
        if (reader.remaining() < streams.word_count)
            throw Error(ErrorKind::truncated_stream,
                        "zero mask holds " + std::to_string(reader.remaining()) + " flags, need " +
                            std::to_string(streams.word_count),
                        reader.position());
        flags.resize(static_cast<std::size_t>(streams.word_count));
        for (auto& f : flags)
            f = reader.read_bit() ? 1 : 0;
    }
    reader.expect_padding_only("zero stream");
    return flags;
}

inline std::vector<std::uint32_t> scatter(const std::vector<std::uint8_t>& flags,
                                          const std::vector<std::uint32_t>& values)
{
    std::vector<std::uint32_t> out(flags.size(), 0);
    std::size_t next = 0;
    for (std::size_t i = 0; i < flags.size(); ++i)
        if (flags[i])
            out[i] = values[next++];
    return out;
}

inline std::vector<std::uint32_t> read_raw_values(const EncodedStreams& streams, std::uint64_t count,
                                                  const CodecConfig& config)
{
    BitReader reader(streams.data_stream);
    if (reader.remaining() / config.word_width < count)
        throw Error(ErrorKind::truncated_stream,
                    "data stream holds fewer than " + std::to_string(count) + " words", reader.position());
    std::vector<std::uint32_t> values(static_cast<std::size_t>(count));
    for (auto& v : values) {
        const std::uint64_t at = reader.position();
        v = static_cast<std::uint32_t>(reader.read_bits(config.word_width));
        if (v == 0)
            throw Error(ErrorKind::malformed_stream, "zero value stored in a non-zero slot", at);
    }
    reader.expect_padding_only("data stream");
    return values;
}

inline std::vector<std::uint32_t> read_block_values(const EncodedStreams& streams, std::uint64_t count,
                                                    const CodecConfig& config, bool nonzero_only)
{
    BitReader reader(streams.data_stream);
    std::vector<std::uint32_t> values;
    // Each block needs at least two bits, which bounds what a stream can hold.
    const std::uint64_t bound = (reader.remaining() / 2 + 1) * config.block_size;
    values.reserve(static_cast<std::size_t>(std::min(count, bound)));
    bpc_read_blocks(reader, count, config, values);
    reader.expect_padding_only("data stream");
    if (nonzero_only && exact_mode(config)) {
        auto it = std::find(values.begin(), values.end(), 0u);
        if (it != values.end())
            throw Error(ErrorKind::malformed_stream,
                        "block word " + std::to_string(it - values.begin()) + " decodes to zero in a non-zero slot");
    }
    return values;
}

} // namespace detail

inline std::vector<std::uint32_t> zvc_decode(const EncodedStreams& streams, const CodecConfig& config)
{
    config.validate();
    const auto flags = detail::read_flags(streams, config, false);
    const auto values = detail::read_raw_values(streams, detail::count_flags(flags, streams), config);
    return detail::scatter(flags, values);
}

inline std::vector<std::uint32_t> zero_rle_codec_decode(const EncodedStreams& streams, const CodecConfig& config)
{
    config.validate();
    const auto flags = detail::read_flags(streams, config, true);
    const auto values = detail::read_raw_values(streams, detail::count_flags(flags, streams), config);
    return detail::scatter(flags, values);
}

inline std::vector<std::uint32_t> bpc_decode_stream(const EncodedStreams& streams, const CodecConfig& config)
{
    config.validate();
    if (!streams.zero_stream.bytes.empty())
        throw Error(ErrorKind::malformed_stream, "plain BPC streams carry no zero stream");
    return detail::read_block_values(streams, streams.word_count, config, false);
}

inline std::vector<std::uint32_t> ebpc_decode(const EncodedStreams& streams, const CodecConfig& config)
{
    config.validate();
    const auto flags = detail::read_flags(streams, config, true);
    const auto values = detail::read_block_values(streams, detail::count_flags(flags, streams), config, true);
    return detail::scatter(flags, values);
}

inline EncodedStreams encode(Codec codec, std::span<const std::uint32_t> words, const CodecConfig& config,
                             SymbolStats* stats = nullptr)
{
    switch (codec) {
    case Codec::ebpc: return ebpc_encode(words, config, stats);
    case Codec::zvc: return zvc_encode(words, config);
    case Codec::zero_rle: return zero_rle_codec_encode(words, config);
    case Codec::bpc: return bpc_encode_stream(words, config, stats);
    }
    throw Error(ErrorKind::invalid_config, "unknown codec");
}

inline std::vector<std::uint32_t> decode(Codec codec, const EncodedStreams& streams, const CodecConfig& config)
{
    switch (codec) {
    case Codec::ebpc: return ebpc_decode(streams, config);
    case Codec::zvc: return zvc_decode(streams, config);
    case Codec::zero_rle: return zero_rle_codec_decode(streams, config);
    case Codec::bpc: return bpc_decode_stream(streams, config);
    }
    throw Error(ErrorKind::invalid_config, "unknown codec");
}

} // namespace ebpc
