//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ebpc/codecs.hpp"
#include "ebpc/config.hpp"
#include "ebpc/error.hpp"

namespace ebpc {

// Storage type codes shared by both file formats. f16_arith only appears in
// compressed files; tensors hold plain f16.
enum class DType : std::uint8_t { u8 = 0, s8 = 1, u16 = 2, s16 = 3, u32 = 4, s32 = 5, f16 = 6, f16_arith = 7 };

constexpr std::string_view to_string(DType dtype) noexcept
{
    switch (dtype) {
    case DType::u8: return "u8";
    case DType::s8: return "s8";
    case DType::u16: return "u16";
    case DType::s16: return "s16";
    case DType::u32: return "u32";
    case DType::s32: return "s32";
    case DType::f16: return "f16";
    case DType::f16_arith: return "f16-arith";
    }
    return "?";
}

inline std::optional<DType> parse_dtype(std::string_view name) noexcept
{
    for (unsigned code = 0; code <= 7; ++code) {
        auto d = static_cast<DType>(code);
        if (to_string(d) == name)
            return d;
    }
    if (name == "f16-bitwise")
        return DType::f16;
    return std::nullopt;
}

constexpr unsigned word_width(DType dtype) noexcept
{
    switch (dtype) {
    case DType::u8:
    case DType::s8: return 8;
    case DType::u16:
    case DType::s16:
    case DType::f16:
    case DType::f16_arith: return 16;
    case DType::u32:
    case DType::s32: return 32;
    }
    return 0;
}

// Applies the word width, signedness and data mode implied by `dtype`.
inline CodecConfig with_dtype(CodecConfig config, DType dtype) noexcept
{
    config.word_width = word_width(dtype);
    config.signed_words = dtype == DType::s8 || dtype == DType::s16 || dtype == DType::s32;
    config.data_mode = dtype == DType::f16         ? DataMode::float_bitwise
                       : dtype == DType::f16_arith ? DataMode::float_arithmetic
                                                   : DataMode::fixed_point;
    return config;
}

inline DType dtype_of(const CodecConfig& config) noexcept
{
    switch (config.data_mode) {
    case DataMode::float_bitwise: return DType::f16;
    case DataMode::float_arithmetic: return DType::f16_arith;
    case DataMode::fixed_point: break;
    }
    const unsigned base = config.word_width == 8 ? 0 : config.word_width == 16 ? 2 : 4;
    return static_cast<DType>(base + (config.signed_words ? 1 : 0));
}

namespace detail {

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t value, unsigned bytes)
{
    for (unsigned i = 0; i < bytes; ++i)
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

inline std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t offset, unsigned bytes) noexcept
{
    std::uint64_t value = 0;
    for (unsigned i = 0; i < bytes; ++i)
        value |= std::uint64_t{in[offset + i]} << (8 * i);
    return value;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Compressed stream file.
//
//   off  size  field
//   0    4     magic "EBPC"
//   4    1     version (1)
//   5    1     dtype code
//   6    1     block size
//   7    1     flags: bit0 base mode (1 = implicit), bits1-3 burst length
//              bits k, bits4-5 codec (0 ebpc, 1 zvc, 2 zero-rle, 3 bpc),
//              bits6-7 reserved zero
//   8    8     word count, LE
//   16   8     zero stream length in bytes, LE
//   24   8     data stream length in bytes, LE
//   32   ...   zero stream bytes, then data stream bytes

inline constexpr std::array<std::uint8_t, 4> kEbpcMagic{0x45, 0x42, 0x50, 0x43};
inline constexpr std::uint8_t kEbpcVersion = 1;
inline constexpr std::size_t kEbpcHeaderSize = 32;

struct EbpcFile {
    CodecConfig config;
    Codec codec = Codec::ebpc;
    EncodedStreams streams;
};

inline std::vector<std::uint8_t> write_ebpc(const EncodedStreams& streams, const CodecConfig& config,
                                            Codec codec = Codec::ebpc)
{
    config.validate();
    std::vector<std::uint8_t> out;
    out.reserve(kEbpcHeaderSize + streams.zero_stream.bytes.size() + streams.data_stream.bytes.size());
    out.assign(kEbpcMagic.begin(), kEbpcMagic.end());
    out.push_back(kEbpcVersion);
    out.push_back(static_cast<std::uint8_t>(dtype_of(config)));
    out.push_back(static_cast<std::uint8_t>(config.block_size));
    out.push_back(static_cast<std::uint8_t>((config.is_implicit() ? 1u : 0u) | (config.burst_len_bits << 1) |
                                            (static_cast<unsigned>(codec) << 4)));
    detail::put_le(out, streams.word_count, 8);
    detail::put_le(out, streams.zero_stream.bytes.size(), 8);
    detail::put_le(out, streams.data_stream.bytes.size(), 8);
    out.insert(out.end(), streams.zero_stream.bytes.begin(), streams.zero_stream.bytes.end());
    out.insert(out.end(), streams.data_stream.bytes.begin(), streams.data_stream.bytes.end());
    return out;
}

inline EbpcFile read_ebpc(std::span<const std::uint8_t> file)
{
    if (file.size() < kEbpcMagic.size() || !std::equal(kEbpcMagic.begin(), kEbpcMagic.end(), file.begin()))
        throw Error(ErrorKind::bad_magic, "not an EBPC stream file");
    if (file.size() < kEbpcHeaderSize)
        throw Error(ErrorKind::length_mismatch, "expected at least " + std::to_string(kEbpcHeaderSize) +
                                                    " header bytes, got " + std::to_string(file.size()));
    if (file[4] != kEbpcVersion)
        throw Error(ErrorKind::unsupported_version, "version " + std::to_string(file[4]));
    if (file[5] > 7)
        throw Error(ErrorKind::unknown_dtype, "dtype code " + std::to_string(file[5]));
    const std::uint8_t flags = file[7];
    if ((flags & 0xC0) != 0)
        throw Error(ErrorKind::invalid_config, "reserved flag bits set");

    EbpcFile result;
    CodecConfig config;
    config.block_size = file[6];
    config.base_mode = (flags & 1) ? BaseMode::implicit_base : BaseMode::explicit_base;
    config.burst_len_bits = (flags >> 1) & 0x7;
    result.config = with_dtype(config, static_cast<DType>(file[5]));
    result.config.validate();
    result.codec = static_cast<Codec>((flags >> 4) & 0x3);

    const std::uint64_t word_count = detail::get_le(file, 8, 8);
    const std::uint64_t zero_len = detail::get_le(file, 16, 8);
    const std::uint64_t data_len = detail::get_le(file, 24, 8);
    const std::uint64_t body = file.size() - kEbpcHeaderSize;
    if (zero_len > body || data_len != body - zero_len) {
        constexpr std::uint64_t max = ~std::uint64_t{0} - kEbpcHeaderSize;
        const std::string expected = (zero_len <= max && data_len <= max - zero_len)
                                         ? std::to_string(kEbpcHeaderSize + zero_len + data_len)
                                         : std::string("more than 2^64");
        throw Error(ErrorKind::length_mismatch,
                    "expected " + expected + " bytes, got " + std::to_string(file.size()));
    }
    auto zero_begin = file.begin() + kEbpcHeaderSize;
    auto data_begin = zero_begin + static_cast<std::ptrdiff_t>(zero_len);
    result.streams.word_count = word_count;
    result.streams.zero_stream = BitStream::from_bytes({zero_begin, data_begin});
    result.streams.data_stream = BitStream::from_bytes({data_begin, file.end()});
    return result;
}

// Byte-level ratio of a stored stream: stream padding counts, the header
// does not.
inline std::optional<double> container_ratio(const EncodedStreams& streams, const CodecConfig& config) noexcept
{
    const std::uint64_t bytes = streams.zero_stream.bytes.size() + streams.data_stream.bytes.size();
    if (bytes == 0)
        return std::nullopt;
    return static_cast<double>(streams.word_count * config.word_width) / static_cast<double>(8 * bytes);
}

// ---------------------------------------------------------------------------
// Raw tensor file.
//
//   off  size  field
//   0    4     magic "TNSR"
//   4    1     version (1)
//   5    1     dtype code (0-6)
//   6    1     layout (0 NCHW, 1 NHWC, 2 CHWN, 3 HWCN)
//   7    1     rank (4)
//   8    16    logical dims N, C, H, W as u32 LE
//   24   ...   words, little-endian, in the declared memory order

enum class Layout : std::uint8_t { nchw = 0, nhwc = 1, chwn = 2, hwcn = 3 };

inline constexpr std::array<Layout, 4> kAllLayouts{Layout::nchw, Layout::nhwc, Layout::chwn, Layout::hwcn};

constexpr std::string_view to_string(Layout layout) noexcept
{
    switch (layout) {
    case Layout::nchw: return "NCHW";
    case Layout::nhwc: return "NHWC";
    case Layout::chwn: return "CHWN";
    case Layout::hwcn: return "HWCN";
    }
    return "?";
}

inline std::optional<Layout> parse_layout(std::string_view name) noexcept
{
    for (Layout l : kAllLayouts) {
        const auto ref = to_string(l);
        if (name.size() == ref.size() &&
            std::equal(name.begin(), name.end(), ref.begin(), [](char a, char b) { return std::toupper(static_cast<unsigned char>(a)) == b; }))
            return l;
    }
    return std::nullopt;
}

inline Layout layout_from_code(std::uint8_t code)
{
    if (code > 3)
        throw Error(ErrorKind::unknown_layout, "layout code " + std::to_string(code));
    return static_cast<Layout>(code);
}

inline constexpr std::array<char, 4> kTensorMagic{'T', 'N', 'S', 'R'};
inline constexpr std::uint8_t kTensorVersion = 1;
inline constexpr std::size_t kTensorHeaderSize = 24;

// Logical axes: 0 = N, 1 = C, 2 = H, 3 = W.
constexpr std::array<unsigned, 4> axis_order(Layout layout) noexcept
{
    switch (layout) {
    case Layout::nchw: return {0, 1, 2, 3};
    case Layout::nhwc: return {0, 2, 3, 1};
    case Layout::chwn: return {1, 2, 3, 0};
    case Layout::hwcn: return {2, 3, 1, 0};
    }
    return {0, 1, 2, 3};
}

struct TensorFile {
    DType dtype = DType::u8;
    Layout layout = Layout::nchw;
    std::array<std::uint32_t, 4> dims{1, 1, 1, 1}; // logical N, C, H, W
    std::vector<std::uint32_t> words;              // memory order of `layout`

    std::uint64_t element_count() const noexcept
    {
        return std::uint64_t{dims[0]} * dims[1] * dims[2] * dims[3];
    }

    // Memory strides per logical axis.
    std::array<std::uint64_t, 4> strides() const noexcept
    {
        const auto order = axis_order(layout);
        std::array<std::uint64_t, 4> s{};
        std::uint64_t stride = 1;
        for (unsigned i = 4; i-- > 0;) {
            s[order[i]] = stride;
            stride *= dims[order[i]];
        }
        return s;
    }

    std::uint64_t offset(std::uint32_t n, std::uint32_t c, std::uint32_t h, std::uint32_t w) const noexcept
    {
        const auto s = strides();
        return n * s[0] + c * s[1] + h * s[2] + w * s[3];
    }

    std::uint32_t at(std::uint32_t n, std::uint32_t c, std::uint32_t h, std::uint32_t w) const
    {
        return words[static_cast<std::size_t>(offset(n, c, h, w))];
    }

    friend bool operator==(const TensorFile&, const TensorFile&) = default;
};

inline TensorFile permute_layout(const TensorFile& tensor, Layout target)
{
    if (static_cast<unsigned>(target) > 3)
        throw Error(ErrorKind::unknown_layout, "layout code " + std::to_string(static_cast<unsigned>(target)));
    TensorFile out = tensor;
    out.layout = target;
    if (target == tensor.layout)
        return out;
    const auto src = tensor.strides();
    const auto dst = out.strides();
    const auto& d = tensor.dims;
    for (std::uint64_t n = 0; n < d[0]; ++n)
        for (std::uint64_t c = 0; c < d[1]; ++c)
            for (std::uint64_t h = 0; h < d[2]; ++h)
                for (std::uint64_t w = 0; w < d[3]; ++w)
                    out.words[n * dst[0] + c * dst[1] + h * dst[2] + w * dst[3]] =
                        tensor.words[n * src[0] + c * src[1] + h * src[2] + w * src[3]];
    return out;
}

// Words in declared memory order, unmodified.
inline std::span<const std::uint32_t> flatten_for_compression(const TensorFile& tensor) noexcept
{
    return tensor.words;
}

inline std::vector<std::uint8_t> write_tensor(const TensorFile& tensor)
{
    if (static_cast<unsigned>(tensor.dtype) > 6)
        throw Error(ErrorKind::unknown_dtype, "tensors store codes 0-6");
    if (tensor.words.size() != tensor.element_count())
        throw Error(ErrorKind::length_mismatch,
                    "tensor holds " + std::to_string(tensor.words.size()) + " words, dims imply " +
                        std::to_string(tensor.element_count()));
    const unsigned bytes = word_width(tensor.dtype) / 8;
    std::vector<std::uint8_t> out;
    out.reserve(kTensorHeaderSize + tensor.words.size() * bytes);
    out.insert(out.end(), kTensorMagic.begin(), kTensorMagic.end());
    out.push_back(kTensorVersion);
    out.push_back(static_cast<std::uint8_t>(tensor.dtype));
    out.push_back(static_cast<std::uint8_t>(tensor.layout));
    out.push_back(4);
    for (auto dim : tensor.dims)
        detail::put_le(out, dim, 4);
    for (auto w : tensor.words)
        detail::put_le(out, w, bytes);
    return out;
}

inline bool looks_like_tensor(std::span<const std::uint8_t> file) noexcept
{
    return file.size() >= 4 && std::equal(kTensorMagic.begin(), kTensorMagic.end(), file.begin());
}

inline TensorFile read_tensor(std::span<const std::uint8_t> file)
{
    if (!looks_like_tensor(file))
        throw Error(ErrorKind::bad_magic, "not a tensor file");
    if (file.size() < kTensorHeaderSize)
        throw Error(ErrorKind::length_mismatch, "expected at least " + std::to_string(kTensorHeaderSize) +
                                                    " header bytes, got " + std::to_string(file.size()));
    if (file[4] != kTensorVersion)
        throw Error(ErrorKind::unsupported_version, "version " + std::to_string(file[4]));
    if (file[5] > 6)
        throw Error(ErrorKind::unknown_dtype, "dtype code " + std::to_string(file[5]));
    TensorFile tensor;
    tensor.dtype = static_cast<DType>(file[5]);
    tensor.layout = layout_from_code(file[6]);
    if (file[7] != 4)
        throw Error(ErrorKind::invalid_config, "rank " + std::to_string(file[7]) + ", only 4 is supported");
    for (unsigned i = 0; i < 4; ++i)
        tensor.dims[i] = static_cast<std::uint32_t>(detail::get_le(file, 8 + 4 * i, 4));
    const unsigned bytes = word_width(tensor.dtype) / 8;
    const std::uint64_t payload = file.size() - kTensorHeaderSize;
    // Divide rather than multiply so huge dims cannot overflow.
    std::uint64_t capacity = payload / bytes;
    bool fits = payload % bytes == 0;
    std::uint64_t count = 1;
    for (auto dim : tensor.dims) {
        if (dim == 0) {
            count = 0;
            break;
        }
        if (count > capacity / dim) {
            fits = false;
            break;
        }
        count *= dim;
    }
    if (!fits || count * bytes != payload)
        throw Error(ErrorKind::length_mismatch,
                    "payload holds " + std::to_string(payload) + " bytes, dims need " +
                        (fits ? std::to_string(count * bytes) : std::string("more")));
    tensor.words.resize(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < tensor.words.size(); ++i)
        tensor.words[i] = static_cast<std::uint32_t>(detail::get_le(file, kTensorHeaderSize + i * bytes, bytes));
    return tensor;
}

// ---------------------------------------------------------------------------
// File helpers.

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (in.bad())
        throw Error(ErrorKind::io, "failed reading " + path.string());
    return bytes;
}

// Writes through a temporary sibling and renames, so a failed write never
// leaves a partial file at `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::filesystem::path tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorKind::io, "cannot create " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error(ErrorKind::io, "failed writing " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::io, "cannot rename into " + path.string());
    }
}

} // namespace ebpc
