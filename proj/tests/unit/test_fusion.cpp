#include <gtest/gtest.h>

#include <functional>

#include "oracles.hpp"
#include "refdeblur/fusion/fuse.hpp"
#include "refdeblur/fusion/warp.hpp"
#include "refdeblur/pipeline/grad_check.hpp"
#include "synth.hpp"

using namespace refdeblur;

namespace {

template <class T>
FusionWeights<T> random_weights(std::size_t C, Rng& rng, bool bias = true) {
    auto w = FusionWeights<T>::zeros(C);
    for (auto* l : {&w.conv1, &w.conv2}) {
        for (T& v : l->weight) v = static_cast<T>(uniform(rng, -0.5, 0.5));
        if (bias) {
            for (T& v : l->bias) v = static_cast<T>(uniform(rng, -0.2, 0.2));
        } else {
            l->bias.clear();
        }
    }
    return w;
}

std::vector<double> as_double(const std::vector<float>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Warp, IdentityIndexMap) {
    Rng rng(1);
    const FeatureMap ref = synth::random_map(6, 5, 3, rng);
    IndexMap idx(6, 5, 1);
    for (std::size_t i = 0; i < idx.size(); ++i) idx.values()[i] = static_cast<std::uint32_t>(i);
    EXPECT_EQ(warp_features(ref, idx), ref);
}

TEST(Warp, ConstantIndexBroadcasts) {
    Rng rng(2);
    const FeatureMap ref = synth::random_map(4, 4, 2, rng);
    const IndexMap idx(3, 5, 1, 9u);
    const FeatureMap out = warp_features(ref, idx);
    ASSERT_TRUE(out.same_shape(FeatureMap(3, 5, 2)));
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < out.pixels(); ++i) EXPECT_EQ(out.plane(c)[i], ref(1, 2, c));
}

TEST(Warp, MatchesGatherOracleAndPreservesValueSet) {
    Rng rng(3);
    const FeatureMap ref = synth::random_map(8, 8, 4, rng);
    std::vector<std::uint32_t> v(64);
    for (auto& x : v) x = static_cast<std::uint32_t>(uniform_int(rng, 0, 63));
    const IndexMap idx(8, 8, 1, v);
    const FeatureMap out = warp_features(ref, idx);
    EXPECT_EQ(out, oracle::gather(ref, v, 8, 8));
    for (std::size_t i = 0; i < 64; ++i) {
        bool found = false;
        for (std::size_t j = 0; j < 64 && !found; ++j) {
            bool same = true;
            for (std::size_t c = 0; c < 4; ++c) same = same && out.plane(c)[i] == ref.plane(c)[j];
            found = same;
        }
        EXPECT_TRUE(found);
    }
}

TEST(Warp, OutOfRangeNamesPixel) {
    const FeatureMap ref(2, 2, 1);
    IndexMap idx(2, 3, 1, 0u);
    idx(2, 1) = 4;
    try {
        warp_features(ref, idx);
        FAIL();
    } catch (const ContractViolation& e) {
        EXPECT_NE(std::string(e.what()).find("(2,1)"), std::string::npos) << e.what();
    }
    MatchResult m;
    m.index = IndexMap(2, 2, 1, 0u);
    m.ref_height = 3;
    m.ref_width = 3;
    EXPECT_THROW(warp_features(ref, m), ContractViolation);
}

TEST(Fuse, ZeroConv1IsResidualIdentity) {
    Rng rng(4);
    const FeatureMap b = synth::random_map(6, 6, 3, rng), t = synth::random_map(6, 6, 3, rng);
    const FeatureMap s = synth::random_map(6, 6, 1, rng);
    auto w = random_weights<float>(3, rng);
    std::fill(w.conv1.weight.begin(), w.conv1.weight.end(), 0.0f);
    std::fill(w.conv1.bias.begin(), w.conv1.bias.end(), 0.0f);
    EXPECT_EQ(fuse(b, t, s, w), b);
    auto z = random_weights<float>(3, rng);
    std::fill(z.conv2.weight.begin(), z.conv2.weight.end(), 0.0f);
    std::fill(z.conv2.bias.begin(), z.conv2.bias.end(), 0.0f);
    EXPECT_EQ(fuse(b, t, s, z), b);
}

TEST(Fuse, MatchesNaiveComposition) {
    Rng rng(5);
    const std::size_t C = 4;
    const FeatureMap b = synth::random_map(8, 8, C, rng), t = synth::random_map(8, 8, C, rng);
    const FeatureMap s = synth::random_map(8, 8, 1, rng);
    const auto w = random_weights<float>(C, rng);
    const FeatureMap out = fuse(b, t, s, w);
    const auto r = oracle::conv(concat_channels(b, t), C, 3, 3, as_double(w.conv1.weight), as_double(w.conv1.bias));
    const auto g = oracle::conv(s, C, 1, 1, as_double(w.conv2.weight), as_double(w.conv2.bias));
    double worst = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double expect = r.values()[i] * g.values()[i] + b.values()[i];
        worst = std::max(worst, std::abs(out.values()[i] - expect));
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(Fuse, LinearInTransWithoutBias) {
    Rng rng(6);
    const FeatureMap b = synth::random_map(7, 6, 2, rng), t1 = synth::random_map(7, 6, 2, rng);
    const FeatureMap t2 = synth::random_map(7, 6, 2, rng), s = synth::random_map(7, 6, 1, rng);
    auto w = random_weights<float>(2, rng, false);
    // Linearity in F_trans holds for the part of conv1 that sees F_trans alone.
    for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t k = 0; k < 9; ++k) w.conv1.weight[(o * 4 + i) * 9 + k] = 0.0f;
    const float a = 0.7f, bt = -1.3f;
    FeatureMap mix(7, 6, 2);
    for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = a * t1.values()[i] + bt * t2.values()[i];
    const auto f1 = fuse(b, t1, s, w), f2 = fuse(b, t2, s, w), fm = fuse(b, mix, s, w);
    for (std::size_t i = 0; i < fm.size(); ++i) {
        const double lhs = fm.values()[i] - b.values()[i];
        const double rhs = a * (f1.values()[i] - b.values()[i]) + bt * (f2.values()[i] - b.values()[i]);
        EXPECT_NEAR(lhs, rhs, 1e-5);
    }
}

TEST(Fuse, ShapeErrors) {
    const FeatureMap b(4, 4, 2), t(4, 4, 2), s(4, 4, 1);
    const auto w = FusionWeights<float>::zeros(2);
    EXPECT_THROW(fuse(b, FeatureMap(4, 5, 2), s, w), ContractViolation);
    EXPECT_THROW(fuse(b, t, FeatureMap(4, 4, 2), w), ContractViolation);
    EXPECT_THROW(fuse(b, t, FeatureMap(3, 4, 1), w), ContractViolation);
    EXPECT_THROW(fuse(FeatureMap(4, 4, 3), FeatureMap(4, 4, 3), s, w), ContractViolation);
    EXPECT_THROW(fuse_backward(FeatureMap(4, 4, 1), b, t, s, w), ContractViolation);
}

TEST(FuseBackward, ZeroUpstreamGivesZero) {
    Rng rng(7);
    const auto b = synth::random_tensor(5, 5, 3, rng), t = synth::random_tensor(5, 5, 3, rng);
    const auto s = synth::random_tensor(5, 5, 1, rng);
    const auto w = random_weights<double>(3, rng);
    const auto g = fuse_backward(Tensor<double>(5, 5, 3), b, t, s, w);
    for (const auto* x : {&g.blur, &g.trans, &g.conf})
        for (double v : x->values()) EXPECT_EQ(v, 0.0);
    for (const auto* v : {&g.conv1.weight, &g.conv1.bias, &g.conv2.weight, &g.conv2.bias})
        for (double x : *v) EXPECT_EQ(x, 0.0);
}

TEST(FuseBackward, ZeroWeightsPassUpstreamToBlur) {
    Rng rng(8);
    const auto b = synth::random_tensor(5, 4, 2, rng), t = synth::random_tensor(5, 4, 2, rng);
    const auto s = synth::random_tensor(5, 4, 1, rng), up = synth::random_tensor(5, 4, 2, rng);
    const auto g = fuse_backward(up, b, t, s, FusionWeights<double>::zeros(2));
    EXPECT_EQ(g.blur, up);
    for (double v : g.trans.values()) EXPECT_EQ(v, 0.0);
}

TEST(FuseBackward, FiniteDifferencesOverSeeds) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(100 + seed);
        const std::size_t C = 4;
        auto b = synth::random_tensor(8, 8, C, rng), t = synth::random_tensor(8, 8, C, rng);
        auto s = synth::random_tensor(8, 8, 1, rng);
        auto w = random_weights<double>(C, rng);
        const auto up = synth::random_tensor(8, 8, C, rng);
        const auto loss = [&] {
            const auto f = fuse(b, t, s, w);
            double acc = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) acc += f.values()[i] * up.values()[i];
            return acc;
        };
        const auto g = fuse_backward(up, b, t, s, w);
        double worst = 0.0;
        auto check = [&](std::span<double> params, std::span<const double> analytic) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double keep = params[i];
                params[i] = keep + 1e-3;
                const double a = loss();
                params[i] = keep - 1e-3;
                const double c = loss();
                params[i] = keep;
                worst = std::max(worst, relative_error(analytic[i], (a - c) / 2e-3));
            }
        };
        check(b.values(), g.blur.values());
        check(t.values(), g.trans.values());
        check(s.values(), g.conf.values());
        check(w.conv1.weight, g.conv1.weight);
        check(w.conv1.bias, g.conv1.bias);
        check(w.conv2.weight, g.conv2.weight);
        check(w.conv2.bias, g.conv2.bias);
        EXPECT_LT(worst, 1e-4) << "seed " << seed;
    }
}

TEST(FusionWeightsBundle, RoundTripAndShapeErrors) {
    Rng rng(9);
    const auto w = random_weights<float>(3, rng);
    WeightBundle b;
    w.store(b);
    for (const char* n : {"fusion.conv1.w", "fusion.conv1.b", "fusion.conv2.w", "fusion.conv2.b"})
        EXPECT_TRUE(b.contains(n)) << n;
    const auto back = FusionWeights<float>::from_bundle(b);
    EXPECT_EQ(back.conv1.weight, w.conv1.weight);
    EXPECT_EQ(back.conv2.bias, w.conv2.bias);
    b.insert_or_assign("fusion.conv2.w", {{2, 1, 1, 1}, {1.0f, 2.0f}});
    EXPECT_THROW(FusionWeights<float>::from_bundle(b), WeightError);
    EXPECT_THROW(FusionWeights<float>::from_bundle(WeightBundle{}), WeightError);
}
