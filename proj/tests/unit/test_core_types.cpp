#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "refdeblur/core/parallel.hpp"
#include "refdeblur/core/pyramid.hpp"
#include "refdeblur/core/random.hpp"
#include "refdeblur/core/resample.hpp"
#include "synth.hpp"

using namespace refdeblur;

TEST(ImageBuf, ClampsAndRejectsNonFinite) {
    ImageBuf img(1, 3, 1, std::vector<float>{-0.5f, 0.25f, 2.0f});
    EXPECT_EQ(img(0, 0), 0.0f);
    EXPECT_EQ(img(1, 0), 0.25f);
    EXPECT_EQ(img(2, 0), 1.0f);
    EXPECT_THROW(ImageBuf(1, 1, 1, std::vector<float>{NAN}), ContractViolation);
    EXPECT_THROW(ImageBuf(1, 1, 1, std::vector<float>{INFINITY}), ContractViolation);
    EXPECT_THROW(ImageBuf(2, 2, 2, 0.5f), ContractViolation);
    EXPECT_THROW(ImageBuf(2, 2, 1, std::vector<float>(3)), ContractViolation);
}

TEST(Tensor, PlanarLayout) {
    Tensor<int> t(2, 3, 2);
    t(2, 1, 1) = 7;
    EXPECT_EQ(t.values()[(1 * 2 + 1) * 3 + 2], 7);
    EXPECT_EQ(t.plane(1)[1 * 3 + 2], 7);
    EXPECT_EQ(t.clamped(5, -3, 1), t(2, 0, 1));
}

TEST(GridIndexing, RoundTrips) {
    for (std::size_t w : {1u, 3u, 17u}) {
        const GridIndexing g{w};
        for (std::size_t i = 0; i < w * 13; ++i) {
            EXPECT_EQ(g.index(g.x_of(i), g.y_of(i)), i);
        }
    }
    EXPECT_EQ(GridIndexing{5}.index(3, 2), 13u);
}

TEST(DownscaleHalf, ConstantStaysConstant) {
    const ImageBuf img(4, 4, 3, 0.7f);
    const ImageBuf out = downscale_half(img);
    ASSERT_EQ(out.height(), 2u);
    ASSERT_EQ(out.width(), 2u);
    for (float v : out.values()) EXPECT_EQ(v, 0.7f);
}

TEST(DownscaleHalf, CheckerboardAverages) {
    const ImageBuf img(2, 2, 1, std::vector<float>{0, 1, 1, 0});
    const ImageBuf out = downscale_half(img);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out(0, 0), 0.5f);
}

TEST(DownscaleHalf, MatchesBlockMeanOracle) {
    Rng rng(11);
    for (auto [h, w] : {std::pair{6, 6}, std::pair{7, 5}, std::pair{1, 9}}) {
        const ImageBuf img = synth::random_image(h, w, 3, rng);
        const ImageBuf out = downscale_half(img);
        const auto ref = oracle::block_mean(img);
        ASSERT_TRUE(out.same_grid(ref.height(), ref.width()));
        for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out.values()[i], static_cast<float>(ref.values()[i]));
    }
}

TEST(DownscaleHalf, RejectsSinglePixel) {
    EXPECT_THROW(downscale_half(ImageBuf(1, 1, 1, 0.3f)), DegenerateSizeError);
}

TEST(DownscaleHalf, IdempotentOnConstants) {
    ImageBuf img(37, 23, 1, 0.123f);
    for (int i = 0; i < 4; ++i) {
        img = downscale_half(img);
        for (float v : img.values()) EXPECT_LE(std::abs(v - 0.123f), std::nextafter(0.123f, 1.0f) - 0.123f);
    }
}

TEST(BuildPyramid, TrainingCropSize) {
    const auto p = build_pyramid(ImageBuf(256, 256, 3, 0.5f), 3);
    ASSERT_EQ(p.depth(), 3u);
    EXPECT_EQ(p.level(1).height(), 256u);
    EXPECT_EQ(p.level(2).height(), 128u);
    EXPECT_EQ(p.level(3).width(), 64u);
}

TEST(BuildPyramid, OddSizesUseCeilHalf) {
    const auto p = build_pyramid(ImageBuf(100, 60, 1, 0.5f), 3);
    EXPECT_TRUE(p.level(1).same_grid(100, 60));
    EXPECT_TRUE(p.level(2).same_grid(50, 30));
    EXPECT_TRUE(p.level(3).same_grid(25, 15));
    const auto q = build_pyramid(ImageBuf(33, 47, 1, 0.5f), 3);
    for (std::size_t k = 1; k <= 3; ++k)
        EXPECT_TRUE(q.level(k).same_grid(ceil_half_pow(33, k), ceil_half_pow(47, k)));
}

TEST(BuildPyramid, SingleLevelIsInput) {
    Rng rng(3);
    const ImageBuf img = synth::random_image(5, 4, 3, rng);
    const auto p = build_pyramid(img, 1);
    ASSERT_EQ(p.depth(), 1u);
    EXPECT_EQ(static_cast<const Tensor<float>&>(p.finest()), static_cast<const Tensor<float>&>(img));
}

TEST(BuildPyramid, FinestLevelBitIdentical) {
    Rng rng(4);
    const ImageBuf img = synth::random_image(40, 32, 3, rng);
    const auto p = build_pyramid(img, 3);
    EXPECT_EQ(static_cast<const Tensor<float>&>(p.finest()), static_cast<const Tensor<float>&>(img));
}

TEST(BuildPyramid, RejectsTooDeep) {
    EXPECT_THROW(build_pyramid(ImageBuf(31, 64, 1, 0.5f), 3), DegenerateSizeError);
    EXPECT_NO_THROW(build_pyramid(ImageBuf(32, 64, 1, 0.5f), 3));
    EXPECT_THROW(build_pyramid(ImageBuf(32, 32, 1, 0.5f), 0), ContractViolation);
}

TEST(UpsampleNearest, Replicates) {
    const FeatureMap one(1, 1, 1, 3.0f);
    const auto up = upsample_nearest_2x(one);
    ASSERT_TRUE(up.same_grid(2, 2));
    for (float v : up.values()) EXPECT_EQ(v, 3.0f);

    const FeatureMap four(2, 2, 1, std::vector<float>{1, 2, 3, 4});
    const auto big = upsample_nearest_2x(four);
    const std::vector<float> expect{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
    EXPECT_EQ(std::vector<float>(big.values().begin(), big.values().end()), expect);
}

TEST(UpsampleNearest, CropMatchesFloorDivision) {
    Rng rng(5);
    const FeatureMap m = synth::random_map(3, 5, 2, rng);
    const auto up = upsample_nearest_2x(m, 5, 9);
    ASSERT_TRUE(up.same_grid(5, 9));
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t y = 0; y < 5; ++y)
            for (std::size_t x = 0; x < 9; ++x) EXPECT_EQ(up(x, y, c), m(x / 2, y / 2, c));
    EXPECT_THROW(upsample_nearest_2x(m, 7, 9), ContractViolation);
}

TEST(UpsampleNearest, DownThenUpRestoresConstant) {
    const ImageBuf img(9, 14, 3, 0.42f);
    const ImageBuf down = downscale_half(img);
    const auto up = upsample_nearest_2x(static_cast<const Tensor<float>&>(down), 9, 14);
    EXPECT_EQ(up, static_cast<const Tensor<float>&>(img));
}

TEST(ToLuma, Weights) {
    EXPECT_FLOAT_EQ(to_luma(ImageBuf(1, 1, 3, 1.0f))(0, 0), 1.0f);
    const ImageBuf red(1, 1, 3, std::vector<float>{1, 0, 0});
    EXPECT_FLOAT_EQ(to_luma(red)(0, 0), 0.299f);
    Rng rng(8);
    const ImageBuf img = synth::random_image(3, 4, 3, rng);
    const ImageBuf l = to_luma(img);
    const auto ref = oracle::luma(img);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(l.values()[i], ref[i], 1e-7);
    const ImageBuf gray = synth::random_image(3, 4, 1, rng);
    EXPECT_EQ(static_cast<const Tensor<float>&>(to_luma(gray)), static_cast<const Tensor<float>&>(gray));
    EXPECT_THROW(to_luma(Tensor<float>(2, 2, 2)), ContractViolation);
}

TEST(Random, Reproducible) {
    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(uniform01(a), uniform01(b));
        const auto v = uniform_int(a, -3, 3);
        EXPECT_EQ(v, uniform_int(b, -3, 3));
        EXPECT_GE(v, -3);
        EXPECT_LE(v, 3);
    }
}

TEST(Parallel, CoversRangeOnceAndRethrows) {
    std::vector<int> hits(1000, 0);
    parallel_chunks(hits.size(), 4, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_chunks(10, 3, [](std::size_t, std::size_t b, std::size_t) {
                     if (b == 0) throw ContractViolation("boom");
                 }),
                 ContractViolation);
}
