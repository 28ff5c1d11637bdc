//
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "ebpc/half.hpp"
#include "ebpc/transform.hpp"
#include "support/generators.hpp"

using namespace ebpc;

namespace {

CodecConfig make(unsigned m, unsigned n, BaseMode base = BaseMode::explicit_base)
{
    CodecConfig c;
    c.word_width = m;
    c.block_size = n;
    c.base_mode = base;
    return c;
}

std::string plane_bits(std::uint64_t plane, unsigned width)
{
    std::string s;
    for (unsigned i = width; i-- > 0;)
        s += ((plane >> i) & 1) ? '1' : '0';
    return s;
}

} // namespace

TEST(DeltaForward, ExplicitBaseExample)
{
    const auto c = make(8, 4);
    const std::vector<std::uint32_t> words{5, 7, 4, 4};
    const DeltaBlock b = delta_forward(words, 0, c);
    ASSERT_TRUE(b.base);
    EXPECT_EQ(*b.base, 5u);
    ASSERT_EQ(b.count, 3u);
    EXPECT_EQ(b.deltas[0], 2);
    EXPECT_EQ(b.deltas[1], -3);
    EXPECT_EQ(b.deltas[2], 0);
}

TEST(DeltaForward, ConstantBlockHasZeroDeltas)
{
    const auto c = make(8, 8);
    const std::vector<std::uint32_t> words(8, 7);
    const DeltaBlock b = delta_forward(words, 0, c);
    EXPECT_EQ(*b.base, 7u);
    for (auto d : b.values())
        EXPECT_EQ(d, 0);
}

TEST(DeltaForward, LargeNegativeStepUsesAllNinePlanes)
{
    const auto c = make(8, 2);
    const std::vector<std::uint32_t> words{255, 1};
    const DeltaBlock b = delta_forward(words, 0, c);
    EXPECT_EQ(b.deltas[0], -254);
    const PlaneSet p = dbp_dbx_forward(b, c);
    std::string pattern;
    for (unsigned j = 9; j-- > 0;)
        pattern += p.dbp_bit(j, 0) ? '1' : '0';
    EXPECT_EQ(pattern, "100000010");
}

TEST(DeltaForward, RejectsWrongBlockLength)
{
    const auto c = make(8, 8);
    const std::vector<std::uint32_t> words(7, 1);
    EXPECT_THROW(delta_forward(words, 0, c), Error);
}

TEST(DeltaInverse, ExplicitBaseExample)
{
    const auto c = make(8, 4);
    DeltaBlock b;
    b.base = 5;
    b.count = 3;
    b.deltas[0] = 2;
    b.deltas[1] = -3;
    b.deltas[2] = 0;
    EXPECT_EQ(delta_inverse(b, 0, c), (std::vector<std::uint32_t>{5, 7, 4, 4}));
}

TEST(DeltaInverse, ImplicitBaseFromZero)
{
    const auto c = make(8, 8, BaseMode::implicit_base);
    DeltaBlock b;
    b.count = 8;
    b.deltas[0] = 7;
    EXPECT_EQ(delta_inverse(b, 0, c), std::vector<std::uint32_t>(8, 7));
}

TEST(Planes, WorkedExample)
{
    const auto c = make(8, 4);
    const std::vector<std::uint32_t> words{5, 7, 4, 4};
    const PlaneSet p = dbp_dbx_forward(delta_forward(words, 0, c), c);
    ASSERT_EQ(p.plane_count, 9u);
    ASSERT_EQ(p.width, 3u);
    EXPECT_EQ(plane_bits(p.dbp[0], 3), "010");
    EXPECT_EQ(plane_bits(p.dbp[1], 3), "100");
    for (unsigned j = 2; j <= 8; ++j)
        EXPECT_EQ(plane_bits(p.dbp[j], 3), "010") << "plane " << j;
    EXPECT_EQ(plane_bits(p.dbx[8], 3), "010");
    for (unsigned j = 2; j <= 7; ++j)
        EXPECT_EQ(plane_bits(p.dbx[j], 3), "000") << "plane " << j;
    EXPECT_EQ(plane_bits(p.dbx[1], 3), "110");
    EXPECT_EQ(plane_bits(p.dbx[0], 3), "110");
}

TEST(Planes, ZeroDeltasGiveZeroPlanes)
{
    const auto c = make(16, 8);
    DeltaBlock b;
    b.base = 3;
    b.count = 7;
    const PlaneSet p = dbp_dbx_forward(b, c);
    EXPECT_EQ(p.plane_count, 17u);
    for (unsigned j = 0; j < p.plane_count; ++j)
        EXPECT_EQ(p.dbx[j], 0u);
    const DeltaBlock back = dbp_dbx_inverse(p, c);
    for (auto d : back.values())
        EXPECT_EQ(d, 0);
}

TEST(Planes, InverseOfWorkedExample)
{
    const auto c = make(8, 4);
    PlaneSet p;
    p.plane_count = 9;
    p.width = 3;
    p.dbx[8] = 0b010;
    p.dbx[1] = 0b110;
    p.dbx[0] = 0b110;
    const DeltaBlock b = dbp_dbx_inverse(p, c);
    ASSERT_EQ(b.count, 3u);
    EXPECT_EQ(b.deltas[0], 2);
    EXPECT_EQ(b.deltas[1], -3);
    EXPECT_EQ(b.deltas[2], 0);
}

TEST(Planes, PlaneCountFollowsMode)
{
    EXPECT_EQ(make(8, 8).plane_count(), 9u);
    EXPECT_EQ(make(32, 8).plane_count(), 33u);
    CodecConfig f = make(16, 8);
    f.data_mode = DataMode::float_arithmetic;
    EXPECT_EQ(f.plane_count(), 16u);
}

TEST(TransformProperty, BlockRoundTripAllConfigs)
{
    gen::Rng rng(21);
    for (unsigned m : {8u, 16u, 32u})
        for (auto base : {BaseMode::explicit_base, BaseMode::implicit_base})
            for (unsigned n : {2u, 4u, 8u, 16u, 64u}) {
                const auto c = make(m, n, base);
                for (int i = 0; i < 2000; ++i) {
                    const auto words = gen::block(rng, n, m);
                    const auto prev = static_cast<std::uint32_t>(rng.bits(m));
                    const DeltaBlock d = delta_forward(words, prev, c);
                    const PlaneSet p = dbp_dbx_forward(d, c);
                    DeltaBlock back = dbp_dbx_inverse(p, c);
                    back.base = d.base;
                    ASSERT_EQ(back, d);
                    ASSERT_EQ(delta_inverse(back, prev, c), words);
                }
            }
}

TEST(TransformProperty, SignedWordsRoundTrip)
{
    gen::Rng rng(22);
    for (unsigned m : {8u, 16u, 32u}) {
        auto c = make(m, 8);
        c.signed_words = true;
        for (int i = 0; i < 5000; ++i) {
            const auto words = gen::block(rng, 8, m);
            const DeltaBlock d = delta_forward(words, 0, c);
            DeltaBlock back = dbp_dbx_inverse(dbp_dbx_forward(d, c), c);
            back.base = d.base;
            ASSERT_EQ(delta_inverse(back, 0, c), words);
        }
    }
}

TEST(TransformProperty, RandomPlaneSetsRoundTrip)
{
    gen::Rng rng(23);
    for (unsigned m : {8u, 16u, 32u}) {
        const auto c = make(m, 16);
        for (int i = 0; i < 5000; ++i) {
            PlaneSet p;
            p.plane_count = c.plane_count();
            p.width = c.delta_count();
            for (unsigned j = 0; j < p.plane_count; ++j)
                p.dbx[j] = rng.bits(p.width);
            const DeltaBlock d = dbp_dbx_inverse(p, c);
            const PlaneSet again = dbp_dbx_forward(d, c);
            for (unsigned j = 0; j < p.plane_count; ++j)
                ASSERT_EQ(again.dbx[j], p.dbx[j]);
        }
    }
}

TEST(Half, ConversionsAreExactOnRepresentableValues)
{
    for (std::uint32_t h = 0; h < 0x10000; ++h) {
        const auto bits = static_cast<std::uint16_t>(h);
        if (!half::is_finite(bits))
            continue;
        const double v = half::to_double(bits);
        const std::uint16_t back = half::from_double(v);
        if (v == 0.0)
            EXPECT_EQ(back & 0x7FFF, 0);
        else
            ASSERT_EQ(back, bits) << h;
    }
    EXPECT_EQ(half::from_double(1.0), 0x3C00);
    EXPECT_EQ(half::from_double(65504.0), 0x7BFF);
    EXPECT_EQ(half::from_double(70000.0), 0x7C00);
    EXPECT_EQ(half::from_double(1.0 + 0x1p-11), 0x3C00); // tie to even
    EXPECT_EQ(half::from_double(1.0 + 3 * 0x1p-11), 0x3C02);
}

TEST(FloatArithmetic, ErrorStaysWithinOneUlpOfLargerOperand)
{
    auto c = make(16, 8);
    c.data_mode = DataMode::float_arithmetic;
    gen::Rng rng(24);
    auto finite_half = [&] {
        // Moderate magnitudes, mixed signs.
        const double v = (rng.unit() * 2 - 1) * std::ldexp(1.0, static_cast<int>(rng.range(0, 10)) - 4);
        return half::from_double(v);
    };
    for (int i = 0; i < 20000; ++i) {
        std::vector<std::uint32_t> words(8);
        for (auto& w : words)
            w = finite_half();
        const DeltaBlock d = delta_forward(words, 0, c);
        DeltaBlock back = dbp_dbx_inverse(dbp_dbx_forward(d, c), c);
        back.base = d.base;
        const auto out = delta_inverse(back, 0, c);
        ASSERT_EQ(out[0], words[0]);
        for (std::size_t k = 1; k < words.size(); ++k) {
            const double want = half::to_double(static_cast<std::uint16_t>(words[k]));
            const double prev = half::to_double(static_cast<std::uint16_t>(out[k - 1]));
            const double larger = std::max(std::fabs(want), std::fabs(prev));
            int exp = 0;
            std::frexp(larger, &exp);
            const double ulp = std::ldexp(1.0, std::max(exp - 11, -24));
            ASSERT_LE(std::fabs(half::to_double(static_cast<std::uint16_t>(out[k])) - want), ulp)
                << "word " << k << " trial " << i;
        }
    }
}
