#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nsk/error.hpp"
#include "nsk/gevrey_tools.hpp"
#include "nsk/random_fields.hpp"

using namespace nsk;

namespace {

SpectralField cosine(const GridSpec& g, std::array<int, 3> k, double amp = 1.0) {
    SpectralField f(g);
    for_each_mode(g, [&](std::size_t idx, const Wavevector& w) {
        bool plus = true, minus = true;
        for (int a = 0; a < g.dim; ++a) {
            plus = plus && w.k[static_cast<std::size_t>(a)] == k[static_cast<std::size_t>(a)];
            minus = minus && w.k[static_cast<std::size_t>(a)] == -k[static_cast<std::size_t>(a)];
        }
        if (plus || minus) f.at(0, idx) = 0.5 * amp;
    });
    return f;
}

SpectralField band(const GridSpec& g, std::uint64_t seed, int kmax, double scale = 1.0) {
    Rng rng(seed);
    return scale * random_band_limited(g, 1, kmax, rng);
}

}  // namespace

TEST(GevreyApply, ZeroTauIsIdentity) {
    const GridSpec g{2, 16, 2.0 * pi};
    const auto f = band(g, 1, 5);
    EXPECT_EQ(gevrey_apply(f, {0.0}).data(), f.data());
}

TEST(GevreyApply, SingleModeScalesByE) {
    const GridSpec g{2, 16, 2.0 * pi};
    const auto f = cosine(g, {1, 0, 0});
    const auto a = gevrey_apply(f, {1.0});
    EXPECT_NEAR((a - std::exp(1.0) * f).max_abs(), 0.0, 1e-15);
}

TEST(GevreyApply, AmplifyThenSmoothIsIdentity) {
    const GridSpec g{3, 16, 2.0 * pi};
    const auto f = band(g, 2, 5);
    const auto back = gevrey_apply(gevrey_apply(f, {2.0}), {2.0, GevreyDirection::smooth});
    EXPECT_LT((back - f).max_abs(), 1e-10 * f.max_abs());
}

TEST(GevreyApply, SmoothingContractsBlockNorms) {
    const GridSpec g{2, 32, 2.0 * pi};
    const auto f = band(g, 3, 12);
    const auto s = gevrey_apply(f, {0.3, GevreyDirection::smooth});
    const auto part = DyadicPartition::for_grid(g);
    const auto bf = block_norms(f, 3.0, {part.j_min, part.j_max});
    const auto bs = block_norms(s, 3.0, {part.j_min, part.j_max});
    // L^3 block norms are not exactly monotone under a Fourier multiplier;
    // the excess is bounded by the bump overlap.
    for (std::size_t i = 0; i < bf.size(); ++i) EXPECT_LE(bs[i], 1.5 * bf[i] + 1e-14);
}

TEST(GevreyApply, GuardsNameTheMode) {
    const GridSpec g{1, 64, 2.0 * pi};
    const auto f = cosine(g, {20, 0, 0});
    try {
        gevrey_apply(f, {50.0});
        FAIL() << "expected OverflowError";
    } catch (const OverflowError& e) {
        EXPECT_NE(std::string(e.what()).find("k = (20)"), std::string::npos) << e.what();
    }
    EXPECT_THROW(gevrey_apply(f, {0.1, GevreyDirection::amplify, 10.0}), OverflowError);
    EXPECT_NO_THROW(gevrey_apply(f, {50.0, GevreyDirection::smooth}));
    EXPECT_THROW(gevrey_apply(f, {-1.0}), DomainError);
}

TEST(KernelNorm, BoundaryCasesAreIdentity) {
    EXPECT_EQ(kernel_f_norm(0.0, 3.0), 1.0);
    EXPECT_EQ(kernel_f_norm(3.0, 3.0), 1.0);
    EXPECT_EQ(kernel_f_norm(0.0, 0.0, 3), 1.0);
    EXPECT_THROW(kernel_f_norm(2.0, 1.0), DomainError);
}

TEST(KernelNorm, PoissonKernelHasUnitMass) {
    // e^{-h|xi|} has a positive kernel, so its L1 norm is the symbol at 0.
    for (double t : {0.1, 1.0, 10.0, 100.0}) EXPECT_NEAR(kernel_f_norm(0.5 * t, t), 1.0, 1e-8) << t;
    EXPECT_NEAR(kernel_f_norm(0.5, 1.0, 3), 1.0, 3e-8);
}

TEST(KernelNorm, ExponentIsNonNegative) {
    for (double t : {1e-3, 0.5, 7.0, 1e4})
        for (double f = 0.0; f <= 1.0; f += 0.05) {
            const double s = f * t;
            EXPECT_GE(std::sqrt(t - s) + std::sqrt(s) - std::sqrt(t), -1e-12);
        }
}

TEST(Multiplier, BoundedByEToTheHalfDimension) {
    EXPECT_EQ(multiplier32_bound(0.0, GridSpec{3, 16, 2.0 * pi}), 1.0);
    const GridSpec g1{1, 4096, 2.0 * pi * 64};
    EXPECT_LE(multiplier32_bound(1.0, g1), std::exp(0.5) * (1 + 1e-9));
    EXPECT_NEAR(multiplier32_bound(1.0, g1), std::exp(0.5), 1e-3);
    const GridSpec g3{3, 32, 2.0 * pi * 4};
    for (double a = 1e-3; a <= 1e3; a *= 10.0) EXPECT_LE(multiplier32_bound(a, g3), std::exp(1.5) * (1 + 1e-9));
    EXPECT_THROW(multiplier32_bound(-1.0, g3), DomainError);
}

TEST(Bilinear, ZeroTimeIsTheProduct) {
    const GridSpec g{2, 32, 2.0 * pi};
    const auto f = band(g, 4, 6), h = band(g, 5, 6);
    EXPECT_LT((bilinear_gevrey(f, h, 0.0, 0.25) - grid_product(f, h)).max_abs(), 1e-15);
    EXPECT_TRUE(bilinear_gevrey(f, SpectralField(g), 3.0, 0.25).is_zero());
}

TEST(Bilinear, HolderRatioUniformInTime) {
    const GridSpec g{2, 32, 2.0 * pi};
    std::vector<double> worst;
    for (double t : {0.0, 1.0, 10.0}) {
        RatioStats st;
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto f = band(g, derive_seed(s, 1), 4), h = band(g, derive_seed(s, 2), 4);
            st.add(bilinear_holder_ratio(f, h, t, 0.25));
        }
        worst.push_back(st.max);
    }
    EXPECT_LE(worst[0], 1.0 + 1e-12);  // plain Hoelder at t = 0
    for (double w : worst) EXPECT_LT(w, 50.0);
}

TEST(HeatMaxReg, SingleModeMatchesClosedForm) {
    const GridSpec g{1, 64, 2.0 * pi};
    const int k = 6;  // plateau of block 2
    const auto v0 = cosine(g, {k, 0, 0});
    MaxRegSetup setup;
    setup.sigma = 0.5;
    setup.c0 = 0.25;
    for (int i = 0; i <= 200; ++i) setup.times.push_back(0.01 * i);
    for (double mu : {0.1, 1.0}) {
        double expect = 0.0;
        for (double t : setup.times) expect = std::max(expect, std::exp(std::sqrt(setup.c0 * t) * k - mu * k * k * t));
        EXPECT_NEAR(heat_gevrey_maxreg_check(v0, {}, mu, setup), expect, 1e-12 * expect) << mu;
    }
}

TEST(HeatMaxReg, MuScalingKeepsTheRatioBounded) {
    const GridSpec g{2, 32, 2.0 * pi};
    const auto v0 = band(g, 6, 8);
    HeatForcing f{band(g, 7, 8), 0.5};
    MaxRegSetup setup;
    setup.rho1 = 1.0;
    for (int i = 0; i <= 200; ++i) setup.times.push_back(0.05 * i);
    std::vector<double> r;
    for (double mu : {0.1, 1.0, 10.0}) r.push_back(heat_gevrey_maxreg_check(v0, f, mu, setup));
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    EXPECT_GT(*lo, 0.0);
    EXPECT_LT(*hi / *lo, 10.0);
}

TEST(HeatMaxReg, ZeroDataAndBadViscosity) {
    const GridSpec g{1, 32, 2.0 * pi};
    MaxRegSetup setup;
    setup.times = {0.0, 1.0};
    EXPECT_EQ(heat_gevrey_maxreg_check(SpectralField(g), {}, 1.0, setup), 0.0);
    EXPECT_THROW(heat_gevrey_maxreg_check(SpectralField(g), {}, 0.0, setup), DomainError);
}

TEST(AnnulusDecay, SingleModeRatioAtMostOne) {
    const GridSpec g{2, 64, 2.0 * pi};
    for (int j = 0; j <= 4; ++j) {
        const auto u = cosine(g, {1 << j, 0, 0});
        for (double zeta : {0.0, 1.0, 2.5})
            for (double alpha : {0.1, 1.0}) EXPECT_LE(lemma51_check(u, j, zeta, alpha), 1.0 + 1e-12);
    }
    EXPECT_THROW(lemma51_check(cosine(g, {1, 0, 0}), 0, 1.0, 0.0), DomainError);
}

TEST(AnnulusDecay, VanishingAlphaRecoversTheBlockScale) {
    const GridSpec g{1, 64, 2.0 * pi};
    const auto u = cosine(g, {6, 0, 0});  // plateau of block 2
    EXPECT_NEAR(lemma51_check(u, 2, 0.0, 1e-12), 1.0, 1e-10);
}

TEST(AnnulusDecay, BoundedOverBlockSweep) {
    const GridSpec g{2, 256, 2.0 * pi};
    Rng rng(9);
    RatioStats st;
    for (int j = 0; j <= 6; ++j) {
        const auto part = DyadicPartition::for_grid(g);
        const auto u = random_phase_field(g, 1, [&](const Wavevector& w) { return part.weight(j, w.norm()) > 0.0 ? 1.0 : 0.0; }, rng);
        st.add(lemma51_check(u, j, 1.0, 1.0));
    }
    EXPECT_LT(st.max, 3.0);
    EXPECT_LE(lemma51_constant(1), 0.75);
    EXPECT_NEAR(lemma51_constant(3), 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(TimeWeightedGevrey, Guards) {
    const GridSpec g{1, 64, 2.0 * pi};
    const Lemma52Setup setup;
    EXPECT_THROW(lemma52_check(cosine(g, {1, 0, 0}), 0.0, 1.0, Band::low, setup), DomainError);
    EXPECT_THROW(lemma52_check(cosine(g, {1, 0, 0}), 1.0, 0.0, Band::low, setup), DomainError);
    EXPECT_EQ(lemma52_check(SpectralField(g), 1.0, 1.0, Band::low, setup), 0.0);
}

TEST(TimeWeightedGevrey, LargeZetaStaysFinite) {
    const GridSpec g{1, 256, 2.0 * pi * 64};
    const auto u = band(g, 11, 60);
    for (double zeta : {1.0, 4.0, 12.0}) {
        const double r = lemma52_check(u, zeta, 10.0, Band::low, Lemma52Setup{});
        EXPECT_TRUE(std::isfinite(r));
        EXPECT_GT(r, 0.0);
    }
}

TEST(Product, IndexConstraintsNameTheViolation) {
    ProductSetup bad{2.0, 0.0, 2.0, 2.0, ProductVariant::m1, 0.0, 0.25};
    try {
        bad.validate(3);
        FAIL();
    } catch (const ConfigurationError& e) {
        EXPECT_NE(std::string(e.what()).find("s1 <= d min(1/p, 2/p - 1/q)"), std::string::npos);
    }
    EXPECT_NO_THROW((ProductSetup{0.5, 0.0, 2.0, 2.0, ProductVariant::m1, 0.0, 0.25}.validate(3)));
    EXPECT_NO_THROW((ProductSetup{1.5, -1.0, 2.0, 2.0, ProductVariant::m2, 0.0, 0.25}.validate(3)));
    EXPECT_THROW((ProductSetup{0.5, 0.0, 5.0, 2.0, ProductVariant::m1, 0.0, 0.25}.validate(3)), ConfigurationError);
}

TEST(Product, SingleModeClosedForm) {
    // cos^2(3x) = 1/2 + cos(6x)/2; 3 and 6 sit on the plateaus of blocks 1 and 2.
    const GridSpec g{3, 32, 2.0 * pi};
    const auto a = cosine(g, {3, 0, 0});
    const ProductSetup setup{0.5, 0.0, 2.0, 2.0, ProductVariant::m1, 0.0, 0.25};
    const double s = setup.s(3);
    EXPECT_DOUBLE_EQ(s, -1.0);
    const double n = std::sqrt(0.5 * g.volume());
    const double expect = std::exp2(2 * s) * 0.5 * n / (std::exp2(setup.s1) * n * std::exp2(setup.s2) * n);
    EXPECT_NEAR(product_estimate_ratio(a, a, setup), expect, 1e-12 * expect);
    EXPECT_EQ(product_estimate_ratio(a, SpectralField(g), setup), 0.0);
}

TEST(Composition, IdentityAndSquare) {
    const GridSpec g{2, 32, 2.0 * pi};
    auto z = band(g, 12, 4);
    CompositionSetup setup;
    setup.t = 1.0;
    const ModeWeight amp = gevrey_weight(std::sqrt(setup.c0 * setup.t));
    z *= 0.1 / besov_norm(z, {1.0, 2.0, 1.0}, Band::all, 0, amp);
    EXPECT_NEAR(composition_gevrey_check(z, [](double x) { return x; }, setup), 1.0, 1e-12);
    const double sq = composition_gevrey_check(z, [](double x) { return x * x; }, setup);
    auto big = z;
    big *= 2.0;
    const double sq2 = composition_gevrey_check(big, [](double x) { return x * x; }, setup);
    EXPECT_LT(sq, 0.5);
    EXPECT_NEAR(sq2 / sq, 2.0, 1e-8);  // F(z) = z^2 is exactly quadratic
}

TEST(Composition, SmallnessIsEnforced) {
    const GridSpec g{2, 32, 2.0 * pi};
    auto z = band(g, 13, 4);
    z *= 10.0 / transform_inverse(z).max_abs();
    EXPECT_THROW(composition_gevrey_check(z, [](double x) { return x / (1 + x); }, CompositionSetup{}), PreconditionError);
}

TEST(RatioStats, TracksExtremes) {
    RatioStats st;
    for (double v : {2.0, 5.0, 1.0, 3.0}) st.add(v);
    EXPECT_EQ(st.max, 5.0);
    EXPECT_EQ(st.min, 1.0);
    EXPECT_EQ(st.argmax, 1u);
    EXPECT_EQ(st.count, 4u);
}

TEST(Calibration, DefaultC0) {
    const auto p = PhysParams::from_scaled(1.0, 1.0, 2.0);
    EXPECT_NEAR(default_c0(p), 0.25, 1e-14);
}
