#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "nsk/error.hpp"
#include "nsk/io.hpp"
#include "nsk/random_fields.hpp"

using namespace nsk;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(::testing::TempDir()) / ("nsk_io_" + name);
    fs::remove_all(p);
    return p;
}

State random_state(const GridSpec& g, std::uint64_t seed) {
    Rng rng(seed);
    return {random_band_limited(g, 1, 4, rng), random_band_limited(g, g.dim, 4, rng)};
}

std::string expect_error(const json& j) {
    try {
        params_from_json(j);
    } catch (const ConfigurationError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Snapshot, RoundTripIsBitExact) {
    const GridSpec g{3, 8, 1.0 / 3.0};
    const State s = random_state(g, 1);
    const auto path = scratch("snap.nskf");
    write_snapshot(path, s, 0.1 + 0.2);
    const auto [back, t] = read_snapshot(path);
    EXPECT_EQ(t, 0.1 + 0.2);
    EXPECT_EQ(back.grid(), g);
    EXPECT_EQ(back.a.data(), s.a.data());
    EXPECT_EQ(back.m.data(), s.m.data());
    EXPECT_EQ(fs::file_size(path), 4 + 4 + 4 + 4 + 8 + 8 + 4 + 4 * g.size() * 16);
}

TEST(Snapshot, RejectsForeignFiles) {
    const auto path = scratch("junk.nskf");
    std::ofstream(path) << "not a snapshot";
    EXPECT_THROW(read_snapshot(path), ConfigurationError);
    EXPECT_THROW(read_snapshot(scratch("absent.nskf")), ConfigurationError);
}

TEST(FieldCsv, RoundTrip) {
    const GridSpec g{2, 16, 2.0 * pi};
    const auto f = random_state(g, 2).m;
    const auto path = scratch("field.csv");
    write_field_csv(path, f);
    const auto back = read_field_csv(path);
    EXPECT_EQ(back.grid(), g);
    EXPECT_EQ(back.data(), f.data());
    std::ifstream is(path);
    std::string header, columns;
    std::getline(is, header);
    std::getline(is, columns);
    EXPECT_EQ(columns, "k1,k2,k3,component,re,im");
}

TEST(Params, ScaledFormDerivesQuantities) {
    const json j = {{"mu_bar", 1.0}, {"lambda_bar", 1.0}, {"kappa_bar", 2.0}, {"rho_star", 1.5}};
    const auto p = params_from_json(j);
    EXPECT_NEAR(p.nu_bar(), 3.0, 1e-15);
    const json out = to_json(p);
    EXPECT_EQ(out["derived"]["regime"], "parabolic");
    EXPECT_NEAR(out["derived"]["alpha_minus"].get<double>(), 1.0, 1e-14);
    const auto again = params_from_json(out);
    EXPECT_EQ(again.kappa.coeffs, p.kappa.coeffs);
    EXPECT_EQ(again.rho_star, 1.5);
}

TEST(Params, ClosureFormAndDiagnostics) {
    const json j = {{"rho_star", 1.0},
                    {"closures", {{"pressure", {0.0, 0.0, 1.0}}, {"mu", {1.0, 0.2}}, {"lambda", {1.0}}, {"kappa", {2.0}}}}};
    const auto p = params_from_json(j);
    EXPECT_EQ(p.mu.coeffs, (std::vector<double>{1.0, 0.2}));
    EXPECT_NE(expect_error({{"mu_bar", 1.0}, {"lambda_bar", 1.0}}).find("params.kappa_bar: missing required field"),
              std::string::npos);
    EXPECT_NE(expect_error({{"mu_bar", "fast"}, {"lambda_bar", 1.0}, {"kappa_bar", 1.0}}).find("params.mu_bar"),
              std::string::npos);
    json bad = j;
    bad["closures"]["pressure"] = {0.0, 0.5};
    EXPECT_NE(expect_error(bad).find("P'(rho*) = 0"), std::string::npos);
}

TEST(Config, StepperAndExperimentRoundTrip) {
    StepperConfig c;
    c.dt = 0.05;
    c.scheme = Scheme::exp_euler;
    c.t_end = 3.0;
    c.sample_times = {1.0, 2.0};
    const auto c2 = stepper_from_json(to_json(c));
    EXPECT_EQ(c2.dt, c.dt);
    EXPECT_EQ(c2.scheme, c.scheme);
    EXPECT_EQ(c2.sample_times, c.sample_times);
    DecayExperiment e;
    e.l_values = {0.0, 1.0};
    e.t_min = 2.0;
    e.t_max = 50.0;
    e.mode = DecayMode::grid_nonlinear;
    e.seed = 99;
    const auto e2 = experiment_from_json(to_json(e));
    EXPECT_EQ(e2.l_values, e.l_values);
    EXPECT_EQ(e2.t_min, 2.0);
    EXPECT_EQ(e2.t_max, 50.0);
    EXPECT_EQ(e2.mode, e.mode);
    EXPECT_EQ(e2.seed, 99u);
    EXPECT_THROW(stepper_from_json({{"dt", -1.0}}), ConfigurationError);
    EXPECT_THROW(grid_from_json({{"dim", 3}, {"points_per_axis", 12}}), ConfigurationError);
}

TEST(Archive, AppendReopenAndResume) {
    const GridSpec g{2, 8, 2.0 * pi};
    const auto p = PhysParams::from_scaled(1.0, 1.0, 2.0);
    StepperConfig c;
    c.t_end = 1.0;
    const auto dir = scratch("archive");
    {
        auto ar = TrajectoryArchive::create(dir, g, p, c, 7);
        double t = 0.0;
        State s;
        EXPECT_FALSE(ar.last(t, s));
        ar.append(0.0, random_state(g, 3));
        ar.append(0.5, random_state(g, 4));
    }
    const auto ar = TrajectoryArchive::open(dir);
    EXPECT_EQ(ar.size(), 2u);
    EXPECT_EQ(ar.grid(), g);
    EXPECT_EQ(ar.header()["seed"], 7);
    EXPECT_NEAR(ar.params().kappa_bar(), 2.0, 1e-15);
    double t = 0.0;
    State s;
    ASSERT_TRUE(ar.last(t, s));
    EXPECT_EQ(t, 0.5);
    EXPECT_EQ(s.a.data(), random_state(g, 4).a.data());
    EXPECT_TRUE(fs::exists(dir / "sample_00001.nskf"));
    EXPECT_THROW(TrajectoryArchive::open(scratch("nothing")), ConfigurationError);
}
