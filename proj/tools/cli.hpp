//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ebpc/ebpc.hpp"

namespace ebpc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Raised for flag combinations CLI11 cannot check by itself.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CodecFlags {
    std::string codec = "ebpc";
    std::string dtype;
    std::uint64_t count = 0;
    unsigned block_size = 8;
    unsigned burst_bits = 4;
    std::string base_mode = "explicit";
    std::string float_mode = "bitwise";
    std::string layout;
};

struct Resolved {
    Codec codec = Codec::ebpc;
    CodecConfig config;
    std::optional<DType> raw_dtype;
    std::optional<Layout> layout;
    bool float_arith = false;
};

inline void add_codec_flags(CLI::App* cmd, CodecFlags& f)
{
    cmd->add_option("--codec", f.codec, "ebpc | zvc | zero-rle | bpc")->capture_default_str();
    cmd->add_option("--dtype", f.dtype, "word type of raw (headerless) input: u8 s8 u16 s16 u32 s32 f16");
    cmd->add_option("--count", f.count, "expected word count of raw input");
    cmd->add_option("--block-size", f.block_size, "words per BPC block (2..64)")->capture_default_str();
    cmd->add_option("--burst-bits", f.burst_bits, "zero-run length field width k (1..7)")->capture_default_str();
    cmd->add_option("--base-mode", f.base_mode, "explicit | implicit")->capture_default_str();
    cmd->add_option("--float-mode", f.float_mode, "f16 handling: bitwise | arith")->capture_default_str();
    cmd->add_option("--layout", f.layout, "permute tensor input to NCHW | NHWC | CHWN | HWCN first");
}

// Flag validation; runs before any file is touched.
inline Resolved resolve(const CodecFlags& f)
{
    Resolved r;
    auto codec = parse_codec(f.codec);
    if (!codec)
        throw UsageError("unknown codec '" + f.codec + "'");
    r.codec = *codec;
    if (!f.dtype.empty()) {
        auto d = parse_dtype(f.dtype);
        if (!d || *d == DType::f16_arith)
            throw UsageError("unknown dtype '" + f.dtype + "'");
        r.raw_dtype = d;
    }
    if (!f.layout.empty()) {
        auto l = parse_layout(f.layout);
        if (!l)
            throw UsageError("unknown layout '" + f.layout + "'");
        r.layout = l;
    }
    if (f.base_mode == "explicit")
        r.config.base_mode = BaseMode::explicit_base;
    else if (f.base_mode == "implicit")
        r.config.base_mode = BaseMode::implicit_base;
    else
        throw UsageError("base mode must be explicit or implicit");
    if (f.float_mode != "bitwise" && f.float_mode != "arith")
        throw UsageError("float mode must be bitwise or arith");
    r.float_arith = f.float_mode == "arith";
    r.config.block_size = f.block_size;
    r.config.burst_len_bits = f.burst_bits;
    try {
        CodecConfig probe = r.config;
        probe.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return r;
}

struct LoadedInput {
    std::vector<std::uint32_t> words;
    DType dtype = DType::u8;
    std::optional<TensorFile> tensor;
};

inline LoadedInput load_input(const std::string& path, const Resolved& r, const CodecFlags& f)
{
    const auto bytes = read_file(path);
    LoadedInput in;
    if (looks_like_tensor(bytes)) {
        TensorFile t = read_tensor(bytes);
        if (r.layout)
            t = permute_layout(t, *r.layout);
        in.dtype = t.dtype;
        in.words = t.words;
        in.tensor = std::move(t);
    } else {
        if (!r.raw_dtype)
            throw UsageError(path + " is not a tensor file; raw input needs --dtype");
        in.dtype = *r.raw_dtype;
        const unsigned width = word_width(in.dtype) / 8;
        if (bytes.size() % width != 0)
            throw Error(ErrorKind::length_mismatch,
                        path + ": " + std::to_string(bytes.size()) + " bytes is not a whole number of words");
        in.words.resize(bytes.size() / width);
        for (std::size_t i = 0; i < in.words.size(); ++i) {
            std::uint32_t w = 0;
            for (unsigned b = 0; b < width; ++b)
                w |= std::uint32_t{bytes[i * width + b]} << (8 * b);
            in.words[i] = w;
        }
    }
    if (f.count != 0 && f.count != in.words.size())
        throw Error(ErrorKind::length_mismatch, path + ": expected " + std::to_string(f.count) + " words, found " +
                                                    std::to_string(in.words.size()));
    return in;
}

inline CodecConfig config_for(const Resolved& r, DType dtype)
{
    if (dtype == DType::f16 && r.float_arith)
        dtype = DType::f16_arith;
    return with_dtype(r.config, dtype);
}

inline std::string format_ratio(std::optional<double> value)
{
    if (!value)
        return "n/a";
    std::ostringstream s;
    s << std::setprecision(6) << *value;
    return s.str();
}

inline void report_encoding(std::ostream& out, Codec codec, const EncodedStreams& streams, const CodecConfig& config)
{
    const auto ratio = compression_ratio(streams, config);
    out << "codec=" << to_string(codec) << " dtype=" << to_string(dtype_of(config))
        << " words=" << streams.word_count << " nonzero=" << streams.nonzero_count.value_or(0)
        << " zero_bits=" << streams.zero_stream.bit_count << " data_bits=" << streams.data_stream.bit_count
        << " payload_bits=" << streams.compressed_bits()
        << " ratio=" << format_ratio(ratio ? std::optional<double>(ratio->value()) : std::nullopt)
        << " container_ratio=" << format_ratio(container_ratio(streams, config)) << '\n';
}

inline std::vector<std::uint32_t> parse_shape(const std::string& text)
{
    std::vector<std::uint32_t> dims;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(part, &used);
            if (used != part.size() || v > std::numeric_limits<std::uint32_t>::max())
                throw std::invalid_argument(part);
            dims.push_back(static_cast<std::uint32_t>(v));
        } catch (const std::logic_error&) {
            throw UsageError("shape must be N,C,H,W");
        }
    }
    if (dims.size() != 4)
        throw UsageError("shape must be N,C,H,W");
    return dims;
}

// Writes CSV to `path`, or to `out` when the path is empty.
template <typename Fn>
void emit_csv(const std::string& path, std::ostream& out, Fn&& fn)
{
    if (path.empty()) {
        fn(out);
        return;
    }
    std::ostringstream buffer;
    fn(buffer);
    const std::string text = buffer.str();
    write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Extended bit-plane compression for sparse word streams"};
    app.require_subcommand(1);

    CodecFlags flags;
    std::string input;
    std::string output;
    std::string csv;

    auto* compress = app.add_subcommand("compress", "tensor or raw words -> EBPC stream file");
    compress->add_option("input", input, "input file")->required();
    compress->add_option("-o,--output", output, "output file")->required();
    add_codec_flags(compress, flags);

    std::string shape_text;
    std::string out_layout = "NCHW";
    auto* decompress = app.add_subcommand("decompress", "EBPC stream file -> raw words or tensor");
    decompress->add_option("input", input, "input file")->required();
    decompress->add_option("-o,--output", output, "output file")->required();
    decompress->add_option("--shape", shape_text, "write a tensor file with logical dims N,C,H,W");
    decompress->add_option("--layout", out_layout, "memory layout of those dims")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "compress, decompress and compare bit for bit");
    verify->add_option("input", input, "input file")->required();
    add_codec_flags(verify, flags);

    std::string report = "summary";
    auto* stats = app.add_subcommand("stats", "sparsity, burst and symbol statistics");
    stats->add_option("input", input, "input file")->required();
    stats->add_option("--report", report, "summary | sparsity | bursts | layouts | symbols")->capture_default_str();
    stats->add_option("--csv", csv, "write CSV here instead of stdout");
    add_codec_flags(stats, flags);

    std::string param = "burst";
    unsigned k_max = 6;
    auto* sweep = app.add_subcommand("sweep", "compression ratio over max burst length or block size");
    sweep->add_option("input", input, "input file")->required();
    sweep->add_option("--param", param, "burst | block")->capture_default_str();
    sweep->add_option("--max-burst-bits", k_max, "largest k in the burst sweep")->capture_default_str();
    sweep->add_option("--csv", csv, "write CSV here instead of stdout");
    add_codec_flags(sweep, flags);

    CorpusSpec spec;
    std::string gen_shape = "1,16,32,32";
    std::string gen_dtype = "u8";
    std::string gen_layout = "NCHW";
    auto* gen = app.add_subcommand("gen", "generate a synthetic feature-map tensor");
    gen->add_option("-o,--output", output, "output tensor file")->required();
    gen->add_option("--shape", gen_shape, "N,C,H,W")->capture_default_str();
    gen->add_option("--sparsity", spec.target_sparsity, "target zero fraction")->capture_default_str();
    gen->add_option("--smoothness", spec.smoothness, "moving-average radius")->capture_default_str();
    gen->add_option("--dtype", gen_dtype, "u8 s8 u16 s16 u32 s32 f16")->capture_default_str();
    gen->add_option("--seed", spec.seed, "generator seed")->capture_default_str();
    gen->add_option("--layout", gen_layout, "memory layout of the written tensor")->capture_default_str();
    unsigned gen_bits = 0;
    gen->add_option("--bits", gen_bits, "keep this many significant bits (integer dtypes; 0 = full width)");

    unsigned threads = 1;
    unsigned repeat = 5;
    auto* bench = app.add_subcommand("bench", "encode/decode throughput in words per second");
    bench->add_option("input", input, "input file (synthetic corpus when omitted)");
    bench->add_option("--threads", threads, "independent streams encoded in parallel")->capture_default_str();
    bench->add_option("--repeat", repeat, "passes per measurement")->capture_default_str();
    add_codec_flags(bench, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (compress->parsed()) {
            const Resolved r = resolve(flags);
            const LoadedInput in = load_input(input, r, flags);
            const CodecConfig config = config_for(r, in.dtype);
            const EncodedStreams streams = encode(r.codec, in.words, config);
            write_file_atomic(output, write_ebpc(streams, config, r.codec));
            report_encoding(out, r.codec, streams, config);
            return kExitOk;
        }

        if (decompress->parsed()) {
            std::optional<std::vector<std::uint32_t>> dims;
            auto layout = parse_layout(out_layout);
            if (!layout)
                throw UsageError("unknown layout '" + out_layout + "'");
            if (!shape_text.empty())
                dims = parse_shape(shape_text);
            const EbpcFile file = read_ebpc(read_file(input));
            const auto words = decode(file.codec, file.streams, file.config);
            const DType dtype = dtype_of(file.config) == DType::f16_arith ? DType::f16 : dtype_of(file.config);
            std::vector<std::uint8_t> bytes;
            if (dims) {
                TensorFile t;
                t.dtype = dtype;
                t.layout = *layout;
                std::copy(dims->begin(), dims->end(), t.dims.begin());
                t.words = words;
                bytes = write_tensor(t);
            } else {
                const unsigned width = word_width(dtype) / 8;
                bytes.reserve(words.size() * width);
                for (auto w : words)
                    for (unsigned b = 0; b < width; ++b)
                        bytes.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
            }
            write_file_atomic(output, bytes);
            out << "words=" << words.size() << " dtype=" << to_string(dtype) << '\n';
            return kExitOk;
        }

        if (verify->parsed()) {
            const Resolved r = resolve(flags);
            const LoadedInput in = load_input(input, r, flags);
            const CodecConfig config = config_for(r, in.dtype);
            const EncodedStreams streams = encode(r.codec, in.words, config);
            const EbpcFile back = read_ebpc(write_ebpc(streams, config, r.codec));
            const auto words = decode(back.codec, back.streams, back.config);
            report_encoding(out, r.codec, streams, config);
            if (config.is_float_arithmetic()) {
                // Not bit-exact by construction; only the word count is checked.
                const bool ok = words.size() == in.words.size();
                out << (ok ? "PASS" : "FAIL") << " (float-arith: lossy, length checked)\n";
                return ok ? kExitOk : kExitDataError;
            }
            if (words != in.words) {
                std::size_t first = 0;
                while (first < words.size() && first < in.words.size() && words[first] == in.words[first])
                    ++first;
                out << "FAIL first mismatch at word " << first << '\n';
                return kExitDataError;
            }
            out << "PASS\n";
            return kExitOk;
        }

        if (stats->parsed()) {
            const Resolved r = resolve(flags);
            if (report != "summary" && report != "sparsity" && report != "bursts" && report != "layouts" &&
                report != "symbols")
                throw UsageError("unknown report '" + report + "'");
            const LoadedInput in = load_input(input, r, flags);
            const CodecConfig config = config_for(r, in.dtype);
            if ((report == "sparsity" || report == "layouts") && !in.tensor)
                throw UsageError("report '" + report + "' needs a tensor file");
            if (report == "summary") {
                const BurstCdf bursts = burst_cdf(in.words);
                const auto zc = bursts.zero_cdf();
                const auto nc = bursts.nonzero_cdf();
                out << "words=" << in.words.size() << " dtype=" << to_string(in.dtype)
                    << " sparsity=" << sparsity(in.words) << '\n';
                out << "zero_burst_p_le_16=" << BurstCdf::at(zc, 16)
                    << " nonzero_burst_p_le_3=" << BurstCdf::at(nc, 3) << '\n';
                for (Codec c : kAllCodecs) {
                    const EncodedStreams s = encode(c, in.words, config);
                    report_encoding(out, c, s, config);
                }
                return kExitOk;
            }
            emit_csv(csv, out, [&](std::ostream& os) {
                if (report == "sparsity") {
                    write_sparsity_csv(os, sparsity_per_channel(*in.tensor), input);
                } else if (report == "bursts") {
                    write_burst_csv(os, burst_cdf(in.words), input);
                } else if (report == "layouts") {
                    os << "source,kind,burst_length,count,cdf\n";
                    for (Layout l : kAllLayouts) {
                        std::ostringstream part;
                        write_burst_csv(part, burst_cdf(permute_layout(*in.tensor, l).words), to_string(l));
                        const std::string text = part.str();
                        os << text.substr(text.find('\n') + 1);
                    }
                } else {
                    write_histogram_csv(os, symbol_histogram(in.words, config), input);
                }
            });
            return kExitOk;
        }

        if (sweep->parsed()) {
            const Resolved r = resolve(flags);
            if (param != "burst" && param != "block")
                throw UsageError("sweep parameter must be burst or block");
            if (k_max < 1 || k_max > 7)
                throw UsageError("--max-burst-bits must be in 1..7");
            const LoadedInput in = load_input(input, r, flags);
            const CodecConfig config = config_for(r, in.dtype);
            const auto rows = param == "burst" ? sweep_max_burst(in.words, config, 1, k_max)
                                               : sweep_block_size(in.words, config);
            emit_csv(csv, out, [&](std::ostream& os) { write_ratio_csv(os, rows, input); });
            return kExitOk;
        }

        if (gen->parsed()) {
            const auto dims = parse_shape(gen_shape);
            auto dtype = parse_dtype(gen_dtype);
            if (!dtype || *dtype == DType::f16_arith)
                throw UsageError("unknown dtype '" + gen_dtype + "'");
            auto layout = parse_layout(gen_layout);
            if (!layout)
                throw UsageError("unknown layout '" + gen_layout + "'");
            if (!(spec.target_sparsity >= 0.0 && spec.target_sparsity <= 1.0))
                throw UsageError("--sparsity must lie in [0, 1]");
            if (gen_bits != 0 && (*dtype == DType::f16 || gen_bits > word_width(*dtype) ||
                                  (detail::is_signed(*dtype) && gen_bits < 2)))
                throw UsageError("--bits must fit an integer dtype (at least 2 for signed)");
            std::copy(dims.begin(), dims.end(), spec.shape.begin());
            spec.dtype = *dtype;
            TensorFile t = generate_corpus(spec);
            if (gen_bits != 0)
                t = reduce_precision(t, gen_bits);
            t = permute_layout(t, *layout);
            write_file_atomic(output, write_tensor(t));
            out << "words=" << t.words.size() << " sparsity=" << sparsity(t.words) << " dtype=" << to_string(t.dtype)
                << " layout=" << to_string(t.layout) << '\n';
            return kExitOk;
        }

        if (bench->parsed()) {
            const Resolved r = resolve(flags);
            if (threads < 1 || repeat < 1)
                throw UsageError("--threads and --repeat must be positive");
            LoadedInput in;
            if (input.empty()) {
                CorpusSpec bench_spec;
                bench_spec.shape = {1, 64, 64, 64};
                bench_spec.target_sparsity = 0.7;
                bench_spec.dtype = r.raw_dtype.value_or(DType::u8);
                TensorFile t = generate_corpus(bench_spec);
                in.dtype = t.dtype;
                in.words = std::move(t.words);
            } else {
                in = load_input(input, r, flags);
            }
            const CodecConfig config = config_for(r, in.dtype);
            const EncodedStreams reference = encode(r.codec, in.words, config);

            auto timed = [&](auto&& body) {
                const auto start = std::chrono::steady_clock::now();
                std::vector<std::thread> pool;
                for (unsigned t = 1; t < threads; ++t)
                    pool.emplace_back(body);
                body();
                for (auto& t : pool)
                    t.join();
                return seconds_since(start);
            };
            const double enc_s = timed([&] {
                for (unsigned i = 0; i < repeat; ++i)
                    (void)encode(r.codec, in.words, config);
            });
            const double dec_s = timed([&] {
                for (unsigned i = 0; i < repeat; ++i)
                    (void)decode(r.codec, reference, config);
            });
            const double total = static_cast<double>(in.words.size()) * repeat * threads;
            const auto ratio = compression_ratio(reference, config);
            out << "codec=" << to_string(r.codec) << " dtype=" << to_string(dtype_of(config))
                << " words=" << in.words.size() << " threads=" << threads << " repeat=" << repeat
                << " ratio=" << format_ratio(ratio ? std::optional<double>(ratio->value()) : std::nullopt) << '\n';
            out << "encode_words_per_s=" << static_cast<std::uint64_t>(total / enc_s)
                << " decode_words_per_s=" << static_cast<std::uint64_t>(total / dec_s) << '\n';
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << (input.empty() ? std::string() : input + ": ") << e.what() << '\n';
        return kExitDataError;
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return kExitDataError;
    }
    return kExitUsage;
}

} // namespace ebpc::cli
