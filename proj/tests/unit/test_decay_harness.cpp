#include <gtest/gtest.h>

#include <cmath>

#include "nsk/decay_harness.hpp"
#include "nsk/error.hpp"

using namespace nsk;

namespace {

const PhysParams kParams = PhysParams::from_scaled(1.0, 1.0, 2.0);

DecayExperiment small_experiment() {
    DecayExperiment e;
    e.t_min = 1.0;
    e.t_max = 4.0;
    e.samples_per_decade = 20;
    return e;
}

}  // namespace

TEST(Experiment, ExponentArithmetic) {
    DecayExperiment e;
    for (double l : {0.0, 1.0, 2.0, 3.5})
        for (double l2 : {0.0, 2.0}) {
            EXPECT_DOUBLE_EQ(e.predicted(Target::density, l, 3) - e.predicted(Target::density, l2, 3), -(l - l2) / 2);
            EXPECT_DOUBLE_EQ(e.predicted(Target::momentum, l, 3) - e.predicted(Target::density, l, 3), -0.5);
        }
    EXPECT_DOUBLE_EQ(e.predicted(Target::density, 0.0, 3), -0.5);
    EXPECT_DOUBLE_EQ(e.predicted(Target::momentum, 0.0, 3), -1.0);
    EXPECT_DOUBLE_EQ(e.predicted(Target::density, 2.0, 3), -1.5);
    e.r = 4.0;
    EXPECT_DOUBLE_EQ(e.sigma_tilde(3), 1.0 - 0.75 + 1.5);
}

TEST(Experiment, AdmissibleRegularity) {
    DecayExperiment e;
    EXPECT_NO_THROW(e.validate(3));
    e.sigma1 = 0.4;
    EXPECT_THROW(e.validate(3), ConfigurationError);
    e.sigma1 = 1.5;
    EXPECT_THROW(e.validate(3), ConfigurationError);  // sigma1 < d - d/q
    e.sigma1 = 1.0;
    EXPECT_THROW(e.validate(2), ConfigurationError);  // empty interval for q = 2, d = 2
    e.l_values = {-2.0};
    EXPECT_THROW(e.validate(3), ConfigurationError);
    e = DecayExperiment{};
    e.samples_per_decade = 5;
    EXPECT_THROW(e.validate(3), ConfigurationError);
    e = DecayExperiment{};
    e.p = 3.0;
    e.sigma1 = 0.5;  // 2 - 3/2 <= 0.5 <= 2 - 3/2
    EXPECT_NO_THROW(e.validate(3));
}

TEST(Experiment, SampleTimesAndCutoff) {
    DecayExperiment e;
    const auto t = e.sample_times();
    EXPECT_EQ(t.size(), 41u);
    EXPECT_DOUBLE_EQ(t.front(), 1.0);
    EXPECT_DOUBLE_EQ(t.back(), 100.0);
    const GridSpec g{3, 32, 2.0 * pi};
    EXPECT_DOUBLE_EQ(e.cutoff(g), 10.0);
    e.xi_cut = 11.0;
    EXPECT_THROW(e.cutoff(g), ConfigurationError);
}

TEST(InitialData, ZeroAmplitudeIsTheZeroState) {
    DecayExperiment e;
    e.amplitude = 0.0;
    const auto s = make_initial_data(e, GridSpec{3, 16, 2.0 * pi});
    EXPECT_TRUE(s.a.is_zero());
    EXPECT_TRUE(s.m.is_zero());
}

TEST(InitialData, RmsMomentumIsTheAmplitude) {
    DecayExperiment e;
    e.amplitude = 1e-3;
    const GridSpec g{3, 16, 2.0 * pi * 4};
    const auto s = make_initial_data(e, g);
    EXPECT_NEAR(lebesgue_norm(s.m, 2.0) / std::sqrt(g.volume()), 1e-3, 1e-15);
    EXPECT_NO_THROW(s.validate());
}

TEST(InitialData, LowFrequencyPlateau) {
    DecayExperiment e;
    const GridSpec g{3, 64, 2.0 * pi * 16};
    const auto s = make_initial_data(e, g);
    const auto prof = low_block_profile(s.m, e.sigma1, default_j0(g));
    // the lowest blocks hold a handful of lattice points; check the resolved ones
    ASSERT_GE(prof.size(), 4u);
    const double ref = prof.back();
    for (std::size_t i = 2; i < prof.size(); ++i) EXPECT_NEAR(prof[i] / ref, 1.0, 0.25) << "block " << i;
}

TEST(InitialData, SeedsChangePhasesNotProfiles) {
    DecayExperiment e;
    const GridSpec g{3, 32, 2.0 * pi * 8};
    const auto a = make_initial_data(e, g);
    e.seed = 2;
    const auto b = make_initial_data(e, g);
    EXPECT_GT((a.m - b.m).max_abs(), 0.1 * a.m.max_abs());
    const auto pa = low_block_profile(a.m, e.sigma1, 0), pb = low_block_profile(b.m, e.sigma1, 0);
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i] / pb[i], 1.0, 0.25);
}

TEST(Fit, RecoversAnExactPowerLaw) {
    std::vector<double> t, y;
    for (int i = 0; i <= 40; ++i) {
        t.push_back(std::pow(10.0, i / 20.0));
        const double s = t.back() - 0.25;
        y.push_back(3.0 * std::pow(1.0 + s * s, -0.35));
    }
    const auto f = fit_decay(t, y, 0.25, 1.0, 100.0, -0.7);
    EXPECT_NEAR(f.slope, -0.7, 1e-12);
    EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
    EXPECT_LT(f.residual, 1e-12);
    EXPECT_EQ(f.samples, 41u);
    EXPECT_THROW(fit_decay(t, y, 0.25, 1.0, 200.0), ConfigurationError);
    const std::vector<double> sparse_t{1.0, 10.0, 100.0}, sparse_y{1.0, 0.5, 0.25};
    EXPECT_THROW(fit_decay(sparse_t, sparse_y, 0.25, 1.0, 100.0), ConfigurationError);
}

TEST(Oracle, LinearExponentsOnAShortWindow) {
    DecayExperiment e;
    e.t_min = 10.0;
    e.t_max = 100.0;
    const auto fits = linear_decay_oracle(e, kParams, 3, 1e3);
    ASSERT_EQ(fits.size(), 4u);
    for (const auto& f : fits) EXPECT_NEAR(f.fit.slope, f.fit.predicted, 0.02) << to_string(f.target) << " l=" << f.l;
}

TEST(Oracle, RejectsUnsupportedIndices) {
    DecayExperiment e;
    e.r = 4.0;
    EXPECT_THROW(linear_decay_oracle(e, kParams, 3, 10.0), ConfigurationError);
    EXPECT_THROW(linear_decay_oracle(DecayExperiment{}, kParams, 3, 0.0), ConfigurationError);
}

TEST(Suite, BoxConstraintAndZeroData) {
    auto e = small_experiment();
    e.mode = DecayMode::grid_linear;
    const GridSpec tight{3, 16, 10.0};
    EXPECT_THROW(run_decay_suite(e, kParams, tight, StepperConfig{}), ConfigurationError);
    const GridSpec g{3, 16, 40.0};
    e.amplitude = 0.0;
    const auto rep = run_decay_suite(e, kParams, g, StepperConfig{});
    EXPECT_TRUE(rep.fits.empty());
    EXPECT_FALSE(rep.failed);
    e.mode = DecayMode::linear_oracle;
    EXPECT_THROW(run_decay_suite(e, kParams, g, StepperConfig{}), ConfigurationError);
}

TEST(Suite, GridLinearRunProducesAllSeries) {
    auto e = small_experiment();
    e.mode = DecayMode::grid_linear;
    const GridSpec g{3, 16, 40.0};
    GevreyTracker tracker({0.0, 0.25}, e.sigma1, e.q, 0);
    const auto rep = run_decay_suite(e, kParams, g, StepperConfig{}, &tracker);
    ASSERT_FALSE(rep.failed) << rep.failure;
    ASSERT_EQ(rep.fits.size(), 4u);
    EXPECT_NEAR(rep.box_ratio, std::sqrt(12.0) / 40.0, 1e-14);
    for (const auto& f : rep.fits) {
        EXPECT_EQ(f.fit.samples, 13u);
        EXPECT_LT(f.fit.slope, 0.0);
    }
    ASSERT_EQ(rep.gevrey.size(), 2u);
    EXPECT_EQ(rep.gevrey[0].times.front(), 0.0);
    const auto v = gevrey_verdict(rep.gevrey);
    EXPECT_TRUE(v.bounded[0]);  // c0 = 0 is the plain norm
}

TEST(Gevrey, ZeroStateAndOverflowNotice) {
    const GridSpec g{3, 16, 2.0 * pi};
    EXPECT_EQ(gevrey_low_norm(State::zero(g), 1.0, 0.25, 1.0, 2.0, 0), 0.0);
    DecayExperiment e;
    const auto s = make_initial_data(e, g);
    GevreyTracker tr({1.0}, 1.0, 2.0, 0);
    tr.observe(1e6, s);
    ASSERT_EQ(tr.series().size(), 1u);
    EXPECT_TRUE(tr.series()[0].overflow);
    EXPECT_NE(tr.series()[0].notice.find("overflow"), std::string::npos);
}

TEST(Gevrey, VerdictLogic) {
    auto series = [](double c0, std::vector<double> v) {
        GevreySeries s;
        s.c0 = c0;
        s.values = std::move(v);
        s.times.resize(s.values.size());
        return s;
    };
    const std::vector<GevreySeries> ok{series(0.25, {1, 1.5}), series(1, {1, 2.9}), series(4, {1, 10}), series(16, {1, 100})};
    const auto v = gevrey_verdict(ok);
    EXPECT_TRUE(v.monotone);
    EXPECT_EQ(v.largest_bounded_c0, 1.0);
    const std::vector<GevreySeries> bad{series(0.25, {1, 5}), series(1, {1, 2})};
    EXPECT_FALSE(gevrey_verdict(bad).monotone);
}

TEST(HighFrequency, ThresholdAndSkip) {
    EXPECT_NEAR(high_band_threshold_rate(kParams, 0), 0.5625, 1e-15);
    const std::vector<double> t{1, 2, 3}, zero{0, 0, 0};
    const auto skip = high_freq_decay_check(t, zero, 1, 3, kParams, 0, 0.25, 3);
    EXPECT_TRUE(skip.skipped);
    std::vector<double> y;
    for (double x : t) y.push_back(std::exp(-2.0 * x));
    const auto fit = high_freq_decay_check(t, y, 1, 3, kParams, 0, 0.25, 3);
    EXPECT_NEAR(fit.slope_t, -2.0, 1e-12);
    EXPECT_LT(fit.slope_sqrt_t, 0.0);
    EXPECT_NEAR(fit.a_constant, 0.5 / std::sqrt(3.0) * 0.5, 1e-15);
}

TEST(HighFrequency, LowPassDataHasEmptyHighBand) {
    DecayExperiment e;
    const GridSpec g{3, 32, 2.0 * pi * 8};
    e.xi_cut = 0.5;
    const auto s = make_initial_data(e, g);
    EXPECT_EQ(high_band_norm(s.a, 2.0, 0), 0.0);
}
