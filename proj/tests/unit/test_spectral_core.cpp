#include <gtest/gtest.h>

#include <cmath>

#include "nsk/error.hpp"
#include "nsk/random_fields.hpp"
#include "nsk/spectral_core.hpp"

using namespace nsk;

namespace {

RealField sample(const GridSpec& g, int comps, const std::function<double(int, const std::array<double, 3>&)>& f) {
    RealField out(g, comps);
    for (int c = 0; c < comps; ++c) {
        auto v = out.component(c);
        for (std::size_t i = 0; i < g.size(); ++i) {
            std::array<double, 3> x{};
            for (int a = 0; a < g.dim; ++a) x[static_cast<std::size_t>(a)] = out.coordinate(i, a);
            v[i] = f(c, x);
        }
    }
    return out;
}

double max_diff(const RealField& a, const RealField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

std::size_t mode_index(const GridSpec& g, std::array<int, 3> k) {
    std::size_t idx = 0;
    for (int a = 0; a < g.dim; ++a) {
        const int kk = (k[static_cast<std::size_t>(a)] + g.points) % g.points;
        idx = idx * static_cast<std::size_t>(g.points) + static_cast<std::size_t>(kk);
    }
    return idx;
}

SpectralField random_vector(const GridSpec& g, std::uint64_t seed, int kmax) {
    Rng rng(seed);
    return random_band_limited(g, g.dim, kmax, rng);
}

}  // namespace

TEST(GridSpec, RejectsBadShapes) {
    EXPECT_THROW((GridSpec{4, 32, 1.0}.validate()), ConfigurationError);
    EXPECT_THROW((GridSpec{2, 24, 1.0}.validate()), ConfigurationError);
    EXPECT_THROW((GridSpec{2, 4, 1.0}.validate()), ConfigurationError);
    EXPECT_THROW((GridSpec{2, 32, 0.0}.validate()), ConfigurationError);
    EXPECT_NO_THROW((GridSpec{3, 16, 5.0}.validate()));
}

TEST(GridSpec, DealiasCutoff) {
    EXPECT_EQ((GridSpec{1, 64, 1.0}.dealias_cutoff()), 21);
    EXPECT_EQ((GridSpec{1, 32, 1.0}.dealias_cutoff()), 10);
    EXPECT_EQ((GridSpec{1, 8, 1.0}.dealias_cutoff()), 2);
}

TEST(Transforms, ConstantFieldTransformsToMeanOnly) {
    const GridSpec g{3, 16, 3.0};
    const auto f = transform_forward(sample(g, 1, [](int, auto&) { return 2.5; }));
    EXPECT_NEAR(f.at(0, 0).real(), 2.5, 1e-14);
    double rest = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) rest = std::max(rest, std::abs(f.at(0, i)));
    EXPECT_LT(rest, 1e-14);
}

TEST(Transforms, CosineHasCoefficientsOneHalf) {
    const GridSpec g{2, 32, 2.0 * pi};
    const auto f = transform_forward(sample(g, 1, [](int, auto& x) { return std::cos(3.0 * x[1]); }));
    EXPECT_NEAR(f.at(0, mode_index(g, {0, 3, 0})).real(), 0.5, 1e-14);
    EXPECT_NEAR(f.at(0, mode_index(g, {0, -3, 0})).real(), 0.5, 1e-14);
    EXPECT_NEAR(f.plancherel_norm(), std::sqrt(0.5 * g.volume()), 1e-12);
}

TEST(Transforms, RoundTripIsExactToRoundoff) {
    for (int d = 1; d <= 3; ++d) {
        const GridSpec g{d, d == 3 ? 16 : 64, 7.0};
        Rng rng(derive_seed(5, static_cast<std::uint64_t>(d)));
        RealField u(g, 2);
        for (auto& v : u.values()) v = rng.normal();
        const auto back = transform_inverse(transform_forward(u));
        EXPECT_LT(max_diff(u, back), 1e-12 * u.max_abs()) << "d = " << d;
    }
}

TEST(Transforms, ComplexFlaggedFieldRefusesInverse) {
    const GridSpec g{1, 16, 1.0};
    SpectralField f(g);
    f.at(0, 1) = Complex(0.0, 1.0);
    const auto s = apply_symbol(f, Symbol{"one-sided", [](const Wavevector& w) { return Complex(w.k[0] > 0 ? 1.0 : 0.0); }});
    EXPECT_FALSE(s.is_real());
    EXPECT_THROW(transform_inverse(s), DomainError);
}

TEST(Symbols, LaplacianOfSineProduct) {
    const GridSpec g{3, 16, 2.0 * pi};
    const auto u = transform_forward(sample(g, 1, [](int, auto& x) { return std::sin(x[0]) * std::cos(2.0 * x[1]) * std::sin(3.0 * x[2]); }));
    const auto lap = transform_inverse(laplacian(u));
    const auto expect = sample(g, 1, [](int, auto& x) { return -14.0 * std::sin(x[0]) * std::cos(2.0 * x[1]) * std::sin(3.0 * x[2]); });
    EXPECT_LT(max_diff(lap, expect), 1e-11);
    const auto neg = transform_inverse(apply_symbol(u, symbols::abs_sq()));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(neg.values()[i], -expect.values()[i], 1e-11);
}

TEST(Symbols, Lambda1OnDiagonalModeIsTwiceTheAxisValue) {
    const GridSpec g{2, 32, 2.0 * pi};
    const auto u = transform_forward(sample(g, 1, [](int, auto& x) { return std::cos(x[0] + x[1]); }));
    const auto v = transform_inverse(apply_symbol(u, symbols::lambda1()));
    const auto expect = sample(g, 1, [](int, auto& x) { return 2.0 * std::cos(x[0] + x[1]); });
    EXPECT_LT(max_diff(v, expect), 1e-12);
}

TEST(Symbols, IdentityAndLinearity) {
    const GridSpec g{2, 32, 3.0};
    const auto f = random_vector(g, 1, 6).extract(0);
    const auto h = random_vector(g, 2, 6).extract(1);
    EXPECT_LT((apply_symbol(f, symbols::identity()) - f).max_abs(), 1e-15);
    const auto lhs = apply_symbol(2.0 * f + h, symbols::lambda_power(1.5));
    const auto rhs = 2.0 * apply_symbol(f, symbols::lambda_power(1.5)) + apply_symbol(h, symbols::lambda_power(1.5));
    EXPECT_LT((lhs - rhs).max_abs(), 1e-13 * lhs.max_abs());
}

TEST(Symbols, LambdaPowerVanishesAtZeroMode) {
    const GridSpec g{1, 16, 1.0};
    SpectralField f(g);
    f.at(0, 0) = 3.0;
    EXPECT_EQ(apply_symbol(f, symbols::lambda_power(-2.0)).at(0, 0), Complex(0.0));
    EXPECT_EQ(apply_symbol(f, symbols::lambda_power(0.0)).at(0, 0), Complex(0.0));
}

TEST(Leray, GradientHasNoSolenoidalPart) {
    const GridSpec g{3, 16, 5.0};
    Rng rng(11);
    const auto phi = random_band_limited(g, 1, 7, rng);
    const auto split = leray_project(gradient(phi));
    EXPECT_LT(split.solenoidal.max_abs(), 1e-14 * gradient(phi).max_abs());
}

TEST(Leray, SolenoidalFieldIsFixed) {
    const GridSpec g{2, 32, 2.0 * pi};
    // stream function psi -> (d2 psi, -d1 psi)
    const auto psi = transform_forward(sample(g, 1, [](int, auto& x) { return std::sin(x[0]) * std::cos(3.0 * x[1]); }));
    SpectralField v(g, 2);
    v.assign(0, apply_symbol(psi, symbols::derivative(1)));
    v.assign(1, -1.0 * apply_symbol(psi, symbols::derivative(0)));
    const auto split = leray_project(v);
    EXPECT_LT((split.solenoidal - v).max_abs(), 1e-14);
    EXPECT_LT(split.compressible.max_abs(), 1e-14);
}

TEST(Leray, ProjectorAlgebra) {
    const GridSpec g{3, 16, 4.0};
    const auto m = random_vector(g, 3, 8);
    const auto split = leray_project(m);
    EXPECT_LT((split.solenoidal + split.compressible - m).max_abs(), 1e-14);
    const auto again = leray_project(split.solenoidal);
    EXPECT_LT((again.solenoidal - split.solenoidal).max_abs(), 1e-14);
    EXPECT_LT(again.compressible.max_abs(), 1e-14);
    EXPECT_LT(leray_project(split.compressible).solenoidal.max_abs(), 1e-14);
    EXPECT_LT(divergence(split.solenoidal).max_abs(), 1e-13);
}

TEST(Leray, NyquistModesStayConsistent) {
    const GridSpec g{2, 16, 2.0 * pi};
    const auto m = random_vector(g, 4, 8);  // reaches the Nyquist index
    EXPECT_LT(divergence(leray_project(m).solenoidal).max_abs(), 1e-13);
    Rng rng(4);
    const auto phi = random_band_limited(g, 1, 8, rng);
    const auto lap_a = divergence(gradient(phi));
    const auto lap_b = apply_symbol(phi, Symbol{"odd", [](const Wavevector& w) { return Complex(-w.odd_norm_sq()); }});
    EXPECT_LT((lap_a - lap_b).max_abs(), 1e-12);
}

TEST(Norms, ConstantAndCosine) {
    const GridSpec g{2, 32, 3.0};
    const auto c = transform_forward(sample(g, 1, [](int, auto&) { return -2.0; }));
    EXPECT_NEAR(lebesgue_norm(c, 1.0), 2.0 * 9.0, 1e-12);
    EXPECT_NEAR(lebesgue_norm(c, infinity), 2.0, 1e-12);
    const GridSpec g1{1, 64, 2.0 * pi};
    const auto cs = transform_forward(sample(g1, 1, [](int, auto& x) { return std::cos(x[0]); }));
    EXPECT_NEAR(lebesgue_norm(cs, 2.0), std::sqrt(pi), 1e-12);
    EXPECT_NEAR(lebesgue_norm(cs, 1.0), 4.0, 5e-3);  // |cos| has kinks
}

TEST(Norms, PlancherelMatchesGridNorm) {
    const GridSpec g{3, 16, 2.5};
    const auto m = random_vector(g, 9, 5);
    EXPECT_NEAR(m.plancherel_norm(), lebesgue_norm(m, 2.0), 1e-12 * m.plancherel_norm());
}

TEST(Norms, RejectsExponentBelowOne) {
    const GridSpec g{1, 16, 1.0};
    EXPECT_THROW(lebesgue_norm(SpectralField(g), 0.5), DomainError);
}

TEST(Fields, MismatchedShapesThrow) {
    SpectralField a(GridSpec{1, 16, 1.0});
    SpectralField b(GridSpec{1, 32, 1.0});
    EXPECT_THROW(a += b, ConfigurationError);
    EXPECT_THROW(divergence(SpectralField(GridSpec{2, 16, 1.0})), ConfigurationError);
}

TEST(Products, DealiasedProductOfLowModesIsExact) {
    const GridSpec g{1, 32, 2.0 * pi};
    const auto f = transform_forward(sample(g, 1, [](int, auto& x) { return std::cos(2.0 * x[0]); }));
    const auto h = transform_forward(sample(g, 1, [](int, auto& x) { return std::sin(3.0 * x[0]); }));
    const auto p = transform_inverse(grid_product(f, h));
    const auto expect = sample(g, 1, [](int, auto& x) { return 0.5 * (std::sin(5.0 * x[0]) + std::sin(x[0])); });
    EXPECT_LT(max_diff(p, expect), 1e-14);
}

TEST(Products, TruncationRemovesHighModes) {
    const GridSpec g{2, 32, 1.0};
    auto f = random_vector(g, 5, 16).extract(0);
    EXPECT_FALSE(is_dealiased(f));
    apply_dealias(f);
    EXPECT_TRUE(is_dealiased(f));
    EXPECT_TRUE(is_dealiased(grid_product(f, f)));
}

TEST(Random, BandLimitedFieldsAreRealAndMeanFree) {
    const GridSpec g{3, 16, 1.0};
    const auto m = random_vector(g, 6, 8);
    EXPECT_LT(m.hermitian_defect(), 1e-15);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(m.at(c, 0), Complex(0.0));
    const auto again = random_vector(g, 6, 8);
    EXPECT_EQ(m.data(), again.data());
}
