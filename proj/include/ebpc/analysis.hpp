//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ebpc/codecs.hpp"
#include "ebpc/container.hpp"
#include "ebpc/half.hpp"
#include "ebpc/symbol_codec.hpp"

namespace ebpc {

// ---------------------------------------------------------------------------
// Synthetic feature maps: spatially smoothed Gaussian noise with a random
// per-channel offset, passed through a ReLU-style threshold chosen from the
// empirical quantile so the zero fraction hits the target, then quantized to
// fixed point (values that survive the threshold never round to zero).
// Signed dtypes threshold |x| instead and keep the sign, which gives
// gradient-like data.

struct CorpusSpec {
    std::array<std::uint32_t, 4> shape{1, 16, 32, 32}; // N, C, H, W
    double target_sparsity = 0.5;
    unsigned smoothness = 2; // moving-average radius over H and W; 0 = white noise
    DType dtype = DType::u8;
    std::uint64_t seed = 1;
};

namespace detail {

// Box-Muller over mt19937_64 (std::normal_distribution is not the same on
// every standard library).
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double next()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300)
            u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0;
    bool has_spare_ = false;
};

// Moving average of radius r along one axis of an h×w plane, edges clamped.
inline void box_blur_rows(std::vector<double>& plane, std::size_t h, std::size_t w, unsigned r)
{
    std::vector<double> row(w);
    for (std::size_t y = 0; y < h; ++y) {
        double* line = plane.data() + y * w;
        for (std::size_t x = 0; x < w; ++x) {
            double sum = 0;
            for (int k = -static_cast<int>(r); k <= static_cast<int>(r); ++k) {
                auto xi = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(x) + k, 0,
                                                     static_cast<std::ptrdiff_t>(w) - 1);
                sum += line[xi];
            }
            row[x] = sum / (2.0 * r + 1.0);
        }
        std::copy(row.begin(), row.end(), line);
    }
}

inline void box_blur_cols(std::vector<double>& plane, std::size_t h, std::size_t w, unsigned r)
{
    std::vector<double> col(h);
    for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t y = 0; y < h; ++y) {
            double sum = 0;
            for (int k = -static_cast<int>(r); k <= static_cast<int>(r); ++k) {
                auto yi = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(y) + k, 0,
                                                     static_cast<std::ptrdiff_t>(h) - 1);
                sum += plane[static_cast<std::size_t>(yi) * w + x];
            }
            col[y] = sum / (2.0 * r + 1.0);
        }
        for (std::size_t y = 0; y < h; ++y)
            plane[y * w + x] = col[y];
    }
}

inline bool is_signed(DType dtype) noexcept
{
    return dtype == DType::s8 || dtype == DType::s16 || dtype == DType::s32;
}

} // namespace detail

inline double sparsity(std::span<const std::uint32_t> words) noexcept
{
    if (words.empty())
        return 0.0;
    const auto zeros = std::count(words.begin(), words.end(), 0u);
    return static_cast<double>(zeros) / static_cast<double>(words.size());
}

inline TensorFile generate_corpus(const CorpusSpec& spec)
{
    if (!(spec.target_sparsity >= 0.0 && spec.target_sparsity <= 1.0))
        throw Error(ErrorKind::invalid_config, "target sparsity must lie in [0, 1]");
    if (spec.dtype == DType::f16_arith || static_cast<unsigned>(spec.dtype) > 6)
        throw Error(ErrorKind::unknown_dtype, "corpus dtype must be a tensor dtype");
    const auto [dn, dc, dh, dw] = spec.shape;
    const std::size_t plane = std::size_t{dh} * dw;
    const std::size_t count = std::size_t{dn} * dc * plane;

    detail::GaussianSource gauss(spec.seed);
    std::vector<double> bias(dc);
    for (auto& b : bias)
        b = 0.5 * gauss.next();

    std::vector<double> field(count);
    std::vector<double> scratch(plane);
    for (std::size_t n = 0; n < dn; ++n) {
        for (std::size_t c = 0; c < dc; ++c) {
            for (auto& v : scratch)
                v = gauss.next();
            if (spec.smoothness > 0) {
                detail::box_blur_rows(scratch, dh, dw, spec.smoothness);
                detail::box_blur_cols(scratch, dh, dw, spec.smoothness);
                // Restore unit variance so the offset keeps its meaning.
                double sq = 0;
                for (auto v : scratch)
                    sq += v * v;
                const double rms = std::sqrt(sq / static_cast<double>(plane));
                if (rms > 0)
                    for (auto& v : scratch)
                        v /= rms;
            }
            double* out = field.data() + (n * dc + c) * plane;
            for (std::size_t i = 0; i < plane; ++i)
                out[i] = scratch[i] + bias[c];
        }
    }

    const bool signed_values = detail::is_signed(spec.dtype);
    std::vector<double> magnitude(count);
    for (std::size_t i = 0; i < count; ++i)
        magnitude[i] = signed_values ? std::fabs(field[i]) : field[i];

    // Zero every value at or below the k-th smallest magnitude.
    const auto zeros = static_cast<std::size_t>(std::llround(spec.target_sparsity * static_cast<double>(count)));
    double threshold;
    if (count == 0) {
        threshold = 0;
    } else if (zeros > 0) {
        std::vector<double> sorted = magnitude;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(zeros - 1), sorted.end());
        threshold = sorted[zeros - 1];
    } else {
        threshold = *std::min_element(magnitude.begin(), magnitude.end()) - 1e-9;
    }
    TensorFile tensor;
    tensor.dtype = spec.dtype;
    tensor.layout = Layout::nchw;
    tensor.dims = spec.shape;
    tensor.words.assign(count, 0);
    const unsigned m = word_width(spec.dtype);
    // Fixed point with m - kIntegerBits fractional bits relative to the unit
    // field variance; floats keep the residual as is.
    constexpr int kIntegerBits = 5;
    const double max_level = signed_values ? std::ldexp(1.0, static_cast<int>(m) - 1) - 1
                                           : std::ldexp(1.0, static_cast<int>(m)) - 1;
    const double scale = spec.dtype == DType::f16 ? 1.0 : std::ldexp(1.0, static_cast<int>(m) - kIntegerBits);
    const std::uint64_t mask = low_mask(m);
    for (std::size_t i = 0; i < count; ++i) {
        if (magnitude[i] <= threshold)
            continue;
        const double r = (magnitude[i] - threshold) * scale;
        const bool negative = signed_values && field[i] < 0;
        std::uint32_t word;
        if (spec.dtype == DType::f16) {
            word = half::from_double(r);
            if (word == 0)
                word = 1; // keep the zero count exact: smallest subnormal
        } else {
            const auto q = static_cast<std::int64_t>(std::clamp(std::ceil(r), 1.0, max_level));
            word = static_cast<std::uint32_t>(static_cast<std::uint64_t>(negative ? -q : q) & mask);
        }
        tensor.words[i] = word;
    }
    const double achieved = sparsity(tensor.words);
    if (count > 0 && std::fabs(achieved - spec.target_sparsity) > 0.01)
        throw Error(ErrorKind::unsatisfiable, "target sparsity " + std::to_string(spec.target_sparsity) +
                                                  " not reachable, achieved " + std::to_string(achieved));
    return tensor;
}

// Re-quantizes an integer tensor to `bits` significant bits inside its
// storage width (e.g. 12-bit data in 16-bit words). Magnitudes round up, so
// the zero pattern is unchanged; the largest magnitudes saturate.
inline TensorFile reduce_precision(const TensorFile& tensor, unsigned bits)
{
    const unsigned m = word_width(tensor.dtype);
    if (tensor.dtype == DType::f16 || tensor.dtype == DType::f16_arith)
        throw Error(ErrorKind::invalid_config, "precision reduction needs an integer dtype");
    const bool signed_values = detail::is_signed(tensor.dtype);
    const unsigned lowest = signed_values ? 2 : 1;
    if (bits < lowest || bits > m)
        throw Error(ErrorKind::invalid_config, "bits must be in " + std::to_string(lowest) + ".." +
                                                   std::to_string(m) + ", got " + std::to_string(bits));
    const unsigned shift = m - bits;
    const std::uint64_t top = low_mask(signed_values ? bits - 1 : bits);
    const std::uint64_t mask = low_mask(m);
    const std::uint64_t sign = std::uint64_t{1} << (m - 1);
    TensorFile out = tensor;
    for (auto& w : out.words) {
        if (w == 0)
            continue;
        const bool negative = signed_values && (w & sign) != 0;
        const std::uint64_t magnitude = negative ? ((~std::uint64_t{w} + 1) & mask) : w;
        const std::uint64_t q = std::min((magnitude + low_mask(shift)) >> shift, top);
        w = static_cast<std::uint32_t>((negative ? ~q + 1 : q) & mask);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Statistics.

// Linear interpolation between closest ranks; p in [0, 100].
inline double percentile(std::vector<double> values, double p)
{
    if (values.empty())
        return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

struct ChannelSparsity {
    std::uint32_t channel = 0;
    std::vector<double> per_sample; // one entry per N
    double mean = 0, p25 = 0, p50 = 0, p75 = 0, min = 0, max = 0;
};

inline std::vector<ChannelSparsity> sparsity_per_channel(const TensorFile& tensor)
{
    const auto [dn, dc, dh, dw] = tensor.dims;
    std::vector<ChannelSparsity> out(dc);
    for (std::uint32_t c = 0; c < dc; ++c) {
        auto& row = out[c];
        row.channel = c;
        for (std::uint32_t n = 0; n < dn; ++n) {
            std::uint64_t zeros = 0;
            for (std::uint32_t h = 0; h < dh; ++h)
                for (std::uint32_t w = 0; w < dw; ++w)
                    zeros += tensor.at(n, c, h, w) == 0;
            const std::uint64_t total = std::uint64_t{dh} * dw;
            row.per_sample.push_back(total ? static_cast<double>(zeros) / static_cast<double>(total) : 0.0);
        }
        if (!row.per_sample.empty()) {
            double sum = 0;
            for (auto v : row.per_sample)
                sum += v;
            row.mean = sum / static_cast<double>(row.per_sample.size());
            row.p25 = percentile(row.per_sample, 25);
            row.p50 = percentile(row.per_sample, 50);
            row.p75 = percentile(row.per_sample, 75);
            row.min = *std::min_element(row.per_sample.begin(), row.per_sample.end());
            row.max = *std::max_element(row.per_sample.begin(), row.per_sample.end());
        }
    }
    return out;
}

// Histogram of maximal zero and non-zero bursts; index = burst length.
struct BurstCdf {
    std::vector<std::uint64_t> zero_counts{0};
    std::vector<std::uint64_t> nonzero_counts{0};

    static std::vector<double> cumulative(const std::vector<std::uint64_t>& counts)
    {
        std::uint64_t total = 0;
        for (auto c : counts)
            total += c;
        std::vector<double> cdf(counts.size(), 0.0);
        std::uint64_t running = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            running += counts[i];
            cdf[i] = total ? static_cast<double>(running) / static_cast<double>(total) : 0.0;
        }
        return cdf;
    }

    std::vector<double> zero_cdf() const { return cumulative(zero_counts); }
    std::vector<double> nonzero_cdf() const { return cumulative(nonzero_counts); }

    // P(burst length <= length).
    static double at(const std::vector<double>& cdf, std::size_t length) noexcept
    {
        if (cdf.empty())
            return 0.0;
        return cdf[std::min(length, cdf.size() - 1)];
    }
};

inline BurstCdf burst_cdf(std::span<const std::uint32_t> words)
{
    BurstCdf out;
    auto bump = [](std::vector<std::uint64_t>& counts, std::size_t length) {
        if (counts.size() <= length)
            counts.resize(length + 1, 0);
        ++counts[length];
    };
    std::size_t i = 0;
    while (i < words.size()) {
        const bool zero = words[i] == 0;
        std::size_t j = i;
        while (j < words.size() && (words[j] == 0) == zero)
            ++j;
        bump(zero ? out.zero_counts : out.nonzero_counts, j - i);
        i = j;
    }
    return out;
}

inline SymbolStats symbol_histogram(std::span<const std::uint32_t> words, const CodecConfig& config)
{
    SymbolStats stats;
    ebpc_encode(words, config, &stats);
    return stats;
}

// ---------------------------------------------------------------------------
// Parameter sweeps.

struct RatioRow {
    Codec codec = Codec::ebpc;
    CodecConfig config;
    std::uint64_t word_count = 0;
    std::uint64_t nonzero_count = 0;
    std::uint64_t compressed_bits = 0;

    // Absent when nothing was encoded.
    std::optional<double> ratio() const noexcept
    {
        if (compressed_bits == 0)
            return std::nullopt;
        return static_cast<double>(word_count * config.word_width) / static_cast<double>(compressed_bits);
    }
};

inline RatioRow measure(Codec codec, std::span<const std::uint32_t> words, const CodecConfig& config)
{
    const EncodedStreams streams = encode(codec, words, config);
    return {codec, config, streams.word_count, streams.nonzero_count.value_or(0), streams.compressed_bits()};
}

// ZVC once, then Zero-RLE and EBPC for every k in [k_min, k_max].
inline std::vector<RatioRow> sweep_max_burst(std::span<const std::uint32_t> words, CodecConfig config,
                                             unsigned k_min = 1, unsigned k_max = 6)
{
    std::vector<RatioRow> rows;
    rows.push_back(measure(Codec::zvc, words, config));
    for (unsigned k = k_min; k <= k_max; ++k) {
        config.burst_len_bits = k;
        rows.push_back(measure(Codec::zero_rle, words, config));
        rows.push_back(measure(Codec::ebpc, words, config));
    }
    return rows;
}

inline constexpr std::array<unsigned, 6> kDefaultBlockSizes{2, 4, 8, 16, 32, 64};

// EBPC and plain BPC for every block size.
inline std::vector<RatioRow> sweep_block_size(std::span<const std::uint32_t> words, CodecConfig config,
                                              std::span<const unsigned> sizes = kDefaultBlockSizes)
{
    std::vector<RatioRow> rows;
    for (unsigned n : sizes) {
        config.block_size = n;
        rows.push_back(measure(Codec::ebpc, words, config));
        rows.push_back(measure(Codec::bpc, words, config));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV reports. Every writer emits a header row first.

inline void write_ratio_csv(std::ostream& out, std::span<const RatioRow> rows, std::string_view source = "")
{
    out << "source,codec,dtype,word_width,block_size,burst_bits,base_mode,word_count,nonzero_count,"
           "compressed_bits,ratio\n";
    for (const auto& row : rows) {
        out << source << ',' << to_string(row.codec) << ',' << to_string(dtype_of(row.config)) << ','
            << row.config.word_width << ',' << row.config.block_size << ',' << row.config.burst_len_bits << ','
            << to_string(row.config.base_mode) << ',' << row.word_count << ',' << row.nonzero_count << ','
            << row.compressed_bits << ',';
        if (auto r = row.ratio())
            out << *r;
        out << '\n';
    }
}

inline void write_burst_csv(std::ostream& out, const BurstCdf& cdf, std::string_view source = "")
{
    out << "source,kind,burst_length,count,cdf\n";
    const auto zc = cdf.zero_cdf();
    const auto nc = cdf.nonzero_cdf();
    for (std::size_t len = 1; len < cdf.zero_counts.size(); ++len)
        if (cdf.zero_counts[len])
            out << source << ",zero," << len << ',' << cdf.zero_counts[len] << ',' << zc[len] << '\n';
    for (std::size_t len = 1; len < cdf.nonzero_counts.size(); ++len)
        if (cdf.nonzero_counts[len])
            out << source << ",nonzero," << len << ',' << cdf.nonzero_counts[len] << ',' << nc[len] << '\n';
}

inline void write_histogram_csv(std::ostream& out, const SymbolStats& stats, std::string_view source = "")
{
    out << "source,symbol,count,blocks,planes_covered\n";
    for (std::size_t i = 0; i < kSymbolKindCount; ++i)
        out << source << ',' << to_string(static_cast<SymbolKind>(i)) << ',' << stats.counts[i] << ','
            << stats.blocks << ',' << stats.planes_covered << '\n';
}

inline void write_sparsity_csv(std::ostream& out, std::span<const ChannelSparsity> rows, std::string_view source = "")
{
    out << "source,channel,samples,mean,min,p25,p50,p75,max\n";
    for (const auto& row : rows)
        out << source << ',' << row.channel << ',' << row.per_sample.size() << ',' << row.mean << ',' << row.min
            << ',' << row.p25 << ',' << row.p50 << ',' << row.p75 << ',' << row.max << '\n';
}

} // namespace ebpc
