//
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one line per criterion, exit status 1 if any gated
// criterion fails.
//

#include <chrono>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "ebpc/ebpc.hpp"
#include "oracle/naive_encoder.hpp"
#include "support/generators.hpp"

using namespace ebpc;

namespace {

int failures = 0;

void report(const char* id, bool ok, const std::string& detail, bool gated = true)
{
    const char* verdict = ok ? "PASS" : (gated ? "FAIL" : "SOFT-FAIL");
    std::printf("%-9s %s %s\n", verdict, id, detail.c_str());
    std::fflush(stdout);
    if (!ok && gated)
        ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, static_cast<double>(args)...);
    return buf;
}

std::string str(const BitStream& s) { return s.to_string().substr(0, s.bit_count); }

double seconds(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const TensorFile& golden()
{
    static const TensorFile t = read_tensor(read_file(EBPC_TEST_DATA_DIR "/golden_u8_s075_w2.tnsr"));
    return t;
}

// Short mixed-sparsity stream into `out`, cheap enough for millions of calls.
void short_stream(gen::Rng& rng, unsigned m, std::vector<std::uint32_t>& out)
{
    const std::size_t length = rng.bits(6) + 1; // 1..64
    const std::uint64_t zero_permille = rng.range(0, 1000);
    const std::uint64_t mask = low_mask(m);
    const unsigned step_bits = static_cast<unsigned>(rng.range(0, m));
    const bool smooth = rng.bits(1) != 0;
    std::uint64_t level = rng.bits(m);
    out.resize(length);
    for (auto& w : out) {
        const std::uint64_t r = rng.bits(64);
        if ((r & 1023) * 1000 < zero_permille * 1024) {
            w = 0;
            continue;
        }
        if (smooth) {
            const std::uint64_t step = (r >> 10) & low_mask(step_bits);
            level = ((r >> 63) ? level + step : level - step) & mask;
            w = static_cast<std::uint32_t>(level);
        } else {
            w = static_cast<std::uint32_t>((r >> 10) & mask);
        }
    }
}

// 1. Round trip through all four codecs for the full config grid.
void losslessness()
{
    const auto t0 = std::chrono::steady_clock::now();
    constexpr int kStreams = 100'000;
    std::uint64_t configs = 0, failures_seen = 0, words = 0;
    gen::Rng rng(1001);
    std::vector<std::uint32_t> s;
    for (unsigned m : {8u, 16u, 32u})
        for (auto base : {BaseMode::explicit_base, BaseMode::implicit_base})
            for (unsigned k = 1; k <= 6; ++k)
                for (unsigned n : {4u, 8u, 16u}) {
                    CodecConfig c;
                    c.word_width = m;
                    c.base_mode = base;
                    c.burst_len_bits = k;
                    c.block_size = n;
                    ++configs;
                    for (int i = 0; i < kStreams; ++i) {
                        short_stream(rng, m, s);
                        words += s.size();
                        for (Codec codec : kAllCodecs) {
                            try {
                                if (decode(codec, encode(codec, s, c), c) != s)
                                    ++failures_seen;
                            } catch (const Error&) {
                                ++failures_seen;
                            }
                        }
                    }
                }
    const double t = seconds(t0);
    report("C1", failures_seen == 0 && configs == 108 && t < 300,
           fmt("losslessness: %.0f configs x 1e5 streams x 4 codecs, %.0f words, %.0f failures, %.1f s", configs,
               static_cast<double>(words), static_cast<double>(failures_seen), t));
}

// 2. Naive string encoder against the optimized path.
void oracle_equivalence()
{
    gen::Rng rng(1002);
    int block_mismatch = 0, stream_mismatch = 0;
    for (int i = 0; i < 10'000; ++i) {
        CodecConfig c = gen::config(rng);
        c.signed_words = rng.chance(0.2);
        const oracle::Params p{c.word_width, c.block_size, c.burst_len_bits, c.is_implicit(), c.signed_words};
        const auto words = gen::block(rng, c.block_size, c.word_width);
        // Single block, non-zero prev in implicit mode via a leading block.
        const auto lead = gen::block(rng, c.block_size, c.word_width);
        std::vector<std::uint32_t> both = lead;
        both.insert(both.end(), words.begin(), words.end());
        BitWriter w;
        bpc_write_blocks(w, both, c);
        const BitStream got = w.finish();
        const std::string want = oracle::block(lead, 0, p) + oracle::block(words, lead.back(), p);
        if (str(got) != want)
            ++block_mismatch;
    }
    for (int i = 0; i < 100; ++i) {
        const CodecConfig c = gen::config(rng);
        const oracle::Params p{c.word_width, c.block_size, c.burst_len_bits, c.is_implicit(), false};
        const auto words = gen::stream(rng, rng.range(1000, 20000), c.word_width, rng.unit());
        const EncodedStreams e = ebpc_encode(words, c);
        const oracle::Streams o = oracle::ebpc(words, p);
        const EncodedStreams b = bpc_encode_stream(words, c);
        if (str(e.zero_stream) != o.zero || str(e.data_stream) != o.data || str(b.data_stream) != oracle::bpc(words, p).data)
            ++stream_mismatch;
    }
    report("C2", block_mismatch == 0 && stream_mismatch == 0,
           fmt("oracle equivalence: 1e4 blocks %.0f mismatches, 100 streams %.0f mismatches", block_mismatch,
               stream_mismatch));
}

// 3. Exact forced values.
void forced_values()
{
    CodecConfig c;
    const EncodedStreams zero = ebpc_encode(std::vector<std::uint32_t>(16, 0), c);
    const double zero_ratio = compression_ratio(zero, c)->value();
    const EncodedStreams constant = ebpc_encode(std::vector<std::uint32_t>(8, 77), c);
    PlaneSet planes;
    planes.plane_count = 9;
    planes.width = 7;
    BitWriter w;
    encode_planes(planes, w, c);
    const std::string full_zero = str(w.finish());
    const bool ok = zero.compressed_bits() == 5 && zero_ratio == 25.6 && constant.compressed_bits() == 22 &&
                    full_zero == "001111";
    report("C3", ok,
           fmt("forced values: all-zero 16 words %.0f bits (ratio %.4g), constant block %.0f bits (ratio %.4f), ",
               static_cast<double>(zero.compressed_bits()), zero_ratio,
               static_cast<double>(constant.compressed_bits()), 64.0 / constant.compressed_bits()) +
               "zero-block symbol \"" + full_zero + "\"");
}

// 4. Max-burst sweep optimum and ZVC dominance over k = 1.
void burst_sweep()
{
    CodecConfig c;
    const auto rows = sweep_max_burst(golden().words, c, 1, 6);
    unsigned best_k = 0;
    double best = 0;
    std::string table;
    for (const auto& r : rows)
        if (r.codec == Codec::zero_rle) {
            table += fmt(" k%.0f=%.3f", r.config.burst_len_bits, *r.ratio());
            if (*r.ratio() > best) {
                best = *r.ratio();
                best_k = r.config.burst_len_bits;
            }
        }
    // ZVC >= Zero-RLE(k=1) on every layout of the corpus and on random streams.
    CodecConfig k1;
    k1.burst_len_bits = 1;
    int streams = 0, violations = 0;
    for (Layout l : kAllLayouts) {
        const auto words = permute_layout(golden(), l).words;
        ++streams;
        violations += zvc_encode(words, k1).compressed_bits() > zero_rle_codec_encode(words, k1).compressed_bits();
    }
    gen::Rng rng(1004);
    for (int i = 0; i < 10'000; ++i) {
        const auto words = gen::stream(rng, rng.range(1, 2000), 8, rng.unit());
        ++streams;
        violations += zvc_encode(words, k1).compressed_bits() > zero_rle_codec_encode(words, k1).compressed_bits();
    }
    report("C4", best_k == 4 && violations == 0,
           "max-burst sweep: Zero-RLE" + table + fmt(" -> best k=%.0f; ZVC >= Zero-RLE(k=1) on %.0f/%.0f streams",
                                                     best_k, streams - violations, streams));
}

// 5. Codec ordering and block-size sweep on the golden corpus.
void ordering()
{
    CodecConfig c;
    const auto& words = golden().words;
    std::map<Codec, double> r;
    for (Codec codec : kAllCodecs)
        r[codec] = measure(codec, words, c).ratio().value();
    const double worst_margin =
        std::min({r[Codec::ebpc] / r[Codec::zvc], r[Codec::ebpc] / r[Codec::zero_rle], r[Codec::ebpc] / r[Codec::bpc]});
    report("C5a", worst_margin >= 1.10,
           fmt("codec ordering: EBPC %.3f, ZVC %.3f, Zero-RLE %.3f, BPC %.3f", r[Codec::ebpc], r[Codec::zvc],
               r[Codec::zero_rle], r[Codec::bpc]) +
               fmt(" -> min EBPC/other %.3f (need >= 1.10)", worst_margin));

    auto sweep = [&](BaseMode base) {
        CodecConfig b;
        b.base_mode = base;
        std::map<unsigned, double> out;
        for (const auto& row : sweep_block_size(words, b))
            if (row.codec == Codec::ebpc)
                out[row.config.block_size] = *row.ratio();
        return out;
    };
    const auto imp = sweep(BaseMode::implicit_base);
    const bool ok = imp.at(16) >= imp.at(8) && imp.at(8) >= 0.95 * imp.at(16);
    report("C5b", ok,
           fmt("block-size sweep (base carried across blocks): n8 %.3f, n16 %.3f, n8/n16 %.4f (need in [0.95, 1])",
               imp.at(8), imp.at(16), imp.at(8) / imp.at(16)));
    const auto exp = sweep(BaseMode::explicit_base);
    std::printf("INFO      C5b explicit base per block: n8 %.3f, n16 %.3f, n8/n16 %.4f (not gated)\n", exp.at(8),
                exp.at(16), exp.at(8) / exp.at(16));
}

// 6. Plane coverage equals P x blocks.
void symbol_accounting()
{
    gen::Rng rng(1006);
    int streams = 0, bad = 0;
    auto check = [&](std::span<const std::uint32_t> words, const CodecConfig& c) {
        SymbolStats stats;
        const EncodedStreams e = ebpc_encode(words, c, &stats);
        const std::uint64_t blocks = (e.nonzero_count.value() + c.block_size - 1) / c.block_size;
        ++streams;
        bad += stats.blocks != blocks || stats.planes_covered != std::uint64_t{c.plane_count()} * blocks;
    };
    CodecConfig m8;
    SymbolStats golden_stats = symbol_histogram(golden().words, m8);
    check(golden().words, m8);
    for (int i = 0; i < 2000; ++i) {
        const CodecConfig c = gen::config(rng);
        check(gen::stream(rng, rng.range(0, 3000), c.word_width, rng.unit()), c);
    }
    report("C6", bad == 0 && golden_stats.planes_covered == 9 * golden_stats.blocks,
           fmt("symbol accounting: golden %.0f blocks cover %.0f planes (%.0f per block); %.0f/%.0f streams exact",
               static_cast<double>(golden_stats.blocks), static_cast<double>(golden_stats.planes_covered),
               static_cast<double>(golden_stats.planes_covered) / golden_stats.blocks, streams - bad, streams));
}

// 7. Mutated containers either decode to exactly word_count words or raise
// a structured error.
void robustness()
{
    gen::Rng rng(1007);
    std::vector<std::vector<std::uint8_t>> seeds;
    for (int i = 0; i < 16; ++i) {
        CodecConfig c = gen::config(rng);
        const auto words = gen::stream(rng, rng.range(0, 400), c.word_width, rng.unit());
        const Codec codec = kAllCodecs[i % 4];
        seeds.push_back(write_ebpc(encode(codec, words, c), c, codec));
    }
    int structured = 0, exact = 0, bad = 0;
    for (int i = 0; i < 10'000; ++i) {
        auto f = seeds[static_cast<std::size_t>(i) % seeds.size()];
        const auto kind = rng.range(0, 5);
        const std::size_t flips = rng.range(1, 4);
        for (std::size_t j = 0; j < flips; ++j) {
            switch (kind) {
            case 0: // bit flip anywhere
                f[rng.range(0, f.size() - 1)] ^= static_cast<std::uint8_t>(1u << rng.range(0, 7));
                break;
            case 1: // bit flip in the header
                f[rng.range(0, 31)] ^= static_cast<std::uint8_t>(1u << rng.range(0, 7));
                break;
            case 2: // random byte in the body
                if (f.size() > 32)
                    f[rng.range(32, f.size() - 1)] = static_cast<std::uint8_t>(rng.bits(8));
                break;
            case 3: // truncate
                f.resize(rng.range(0, f.size()));
                break;
            case 4: // extend
                for (auto extra = rng.range(1, 9); extra > 0; --extra)
                    f.push_back(static_cast<std::uint8_t>(rng.bits(8)));
                break;
            default: // perturb word count
                f[8 + rng.range(0, 7)] = static_cast<std::uint8_t>(rng.bits(8));
                break;
            }
            if (f.empty())
                break;
        }
        try {
            const EbpcFile file = read_ebpc(f);
            const auto words = decode(file.codec, file.streams, file.config);
            if (words.size() == file.streams.word_count)
                ++exact;
            else
                ++bad;
        } catch (const Error&) {
            ++structured;
        } catch (...) {
            ++bad;
        }
    }
    report("C7", bad == 0,
           fmt("decoder robustness: 1e4 mutations -> %.0f structured errors, %.0f exact-length decodes, %.0f other",
               structured, exact, bad));
}

// 8. Single-stream encode throughput (soft).
void throughput()
{
    CorpusSpec spec;
    spec.shape = {1, 64, 64, 64};
    spec.target_sparsity = 0.7;
    const TensorFile t = generate_corpus(spec);
    CodecConfig c;
    const int repeat = 10;
    std::uint64_t bits = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < repeat; ++i)
        bits += ebpc_encode(t.words, c).compressed_bits();
    const double enc = static_cast<double>(t.words.size()) * repeat / seconds(t0);
    const EncodedStreams e = ebpc_encode(t.words, c);
    const auto t1 = std::chrono::steady_clock::now();
    for (int i = 0; i < repeat; ++i)
        bits += ebpc_decode(e, c).size();
    const double dec = static_cast<double>(t.words.size()) * repeat / seconds(t1);
    report("C8", enc >= 10e6,
           fmt("throughput (m=8, single stream): encode %.1f Mwords/s, decode %.1f Mwords/s (soft target 10)",
               enc / 1e6, dec / 1e6),
           false);
    (void)bits;
}

} // namespace

int main()
{
    losslessness();
    oracle_equivalence();
    forced_values();
    burst_sweep();
    ordering();
    symbol_accounting();
    robustness();
    throughput();
    std::printf("%d gated criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
