//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ebpc/error.hpp"

namespace ebpc {

// Bit order throughout the library: fields are written most-significant bit
// first, and bytes are filled starting at their most-significant bit.

constexpr std::uint64_t low_mask(unsigned width) noexcept
{
    return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

// A finished bit sequence. `bytes` holds ceil(bit_count / 8) bytes, with
// the unused tail of the last byte zero.
struct BitStream {
    std::vector<std::uint8_t> bytes;
    std::uint64_t bit_count = 0;

    static BitStream from_bytes(std::vector<std::uint8_t> bytes)
    {
        BitStream s;
        s.bit_count = std::uint64_t{bytes.size()} * 8;
        s.bytes = std::move(bytes);
        return s;
    }

    bool empty() const noexcept { return bit_count == 0; }

    // '0'/'1' rendering, mostly for tests and diagnostics.
    std::string to_string() const
    {
        std::string out;
        out.reserve(bit_count);
        for (std::uint64_t i = 0; i < bit_count; ++i)
            out.push_back(((bytes[i >> 3] >> (7 - (i & 7))) & 1) ? '1' : '0');
        return out;
    }

    friend bool operator==(const BitStream&, const BitStream&) = default;
};

class BitWriter {
public:
    BitWriter() = default;

    void write_bits(std::uint64_t value, unsigned width)
    {
        if (width > 64)
            throw Error(ErrorKind::contract_violation,
                        "write width " + std::to_string(width) + " exceeds 64");
        if (width < 64 && (value >> width) != 0)
            throw Error(ErrorKind::contract_violation,
                        "value does not fit in " + std::to_string(width) + " bits");
        if (width > 56) {
            put(value >> 32, width - 32);
            put(value & low_mask(32), 32);
        } else {
            put(value, width);
        }
    }

    void write_bit(bool bit) { put(bit ? 1u : 0u, 1); }

    // Appends another finished stream bit by bit (byte-wise when aligned).
    void append(const BitStream& other)
    {
        std::uint64_t full = other.bit_count / 8;
        for (std::uint64_t i = 0; i < full; ++i)
            put(other.bytes[i], 8);
        unsigned rest = static_cast<unsigned>(other.bit_count % 8);
        if (rest)
            put(other.bytes[full] >> (8 - rest), rest);
    }

    std::uint64_t bits_written() const noexcept { return bits_written_; }

    // Pads the pending partial byte with zeros and hands over the buffer.
    // The writer is left empty.
    BitStream finish()
    {
        if (pending_ > 0)
            bytes_.push_back(static_cast<std::uint8_t>(acc_ << (8 - pending_)));
        BitStream out{std::move(bytes_), bits_written_};
        bytes_ = {};
        acc_ = 0;
        pending_ = 0;
        bits_written_ = 0;
        return out;
    }

private:
    void put(std::uint64_t value, unsigned width)
    {
        if (width == 0)
            return;
        acc_ = (acc_ << width) | value;
        pending_ += width;
        bits_written_ += width;
        while (pending_ >= 8) {
            pending_ -= 8;
            bytes_.push_back(static_cast<std::uint8_t>(acc_ >> pending_));
        }
        acc_ &= low_mask(pending_);
    }

    std::vector<std::uint8_t> bytes_;
    std::uint64_t acc_ = 0;    // pending bits, right-aligned (< 8 between calls)
    unsigned pending_ = 0;
    std::uint64_t bits_written_ = 0;
};

// Non-owning reader. Reading past `bit_count` is always an error.
class BitReader {
public:
    BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_count)
        : data_(bytes), bit_count_(std::min<std::uint64_t>(bit_count, std::uint64_t{bytes.size()} * 8))
    {
    }

    explicit BitReader(std::span<const std::uint8_t> bytes)
        : BitReader(bytes, std::uint64_t{bytes.size()} * 8)
    {
    }

    explicit BitReader(const BitStream& stream)
        : BitReader(stream.bytes, stream.bit_count)
    {
    }

    std::uint64_t read_bits(unsigned width)
    {
        if (width > 64)
            throw Error(ErrorKind::contract_violation,
                        "read width " + std::to_string(width) + " exceeds 64", cursor_);
        if (remaining() < width)
            throw Error(ErrorKind::truncated_stream,
                        "need " + std::to_string(width) + " bits, " +
                            std::to_string(remaining()) + " left",
                        cursor_);
        std::uint64_t value = 0;
        unsigned need = width;
        while (need > 0) {
            unsigned avail = 8 - static_cast<unsigned>(cursor_ & 7);
            unsigned take = std::min(avail, need);
            std::uint64_t byte = data_[cursor_ >> 3];
            value = (value << take) | ((byte >> (avail - take)) & low_mask(take));
            cursor_ += take;
            need -= take;
        }
        return value;
    }

    bool read_bit() { return read_bits(1) != 0; }

    std::uint64_t position() const noexcept { return cursor_; }
    std::uint64_t bit_count() const noexcept { return bit_count_; }
    std::uint64_t remaining() const noexcept { return bit_count_ - cursor_; }

    // Every bit after the cursor must be zero padding confined to the last
    // byte; anything else means the stream carries data we did not consume.
    void expect_padding_only(std::string_view stream_name) const
    {
        std::uint64_t used_bytes = (cursor_ + 7) / 8;
        std::uint64_t total_bytes = (bit_count_ + 7) / 8;
        if (used_bytes != total_bytes)
            throw Error(ErrorKind::trailing_data,
                        std::string(stream_name) + " has " +
                            std::to_string(total_bytes - used_bytes) + " unused bytes",
                        cursor_);
        for (std::uint64_t pos = cursor_; pos < bit_count_; ++pos) {
            if ((data_[pos >> 3] >> (7 - (pos & 7))) & 1)
                throw Error(ErrorKind::trailing_data,
                            std::string(stream_name) + " has non-zero bits after the last symbol",
                            pos);
        }
    }

private:
    std::span<const std::uint8_t> data_;
    std::uint64_t bit_count_;
    std::uint64_t cursor_ = 0;
};

} // namespace ebpc
