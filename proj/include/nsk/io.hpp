#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include <json.hpp>

#include "nsk/decay_harness.hpp"
#include "nsk/integrator.hpp"
#include "nsk/nsk_model.hpp"
#include "nsk/spectral_core.hpp"

namespace nsk {

using json = nlohmann::json;

// Snapshot file (.nskf), all values in host byte order:
//   char[4] "NSKF" | uint32 version (1) | int32 dim | int32 points | float64 length
//   | float64 time | int32 components (1 + dim)
//   | components x points^dim x (float64 re, float64 im), FFT order, a first then m.
void write_snapshot(const std::filesystem::path& path, const State& s, double t);
std::pair<State, double> read_snapshot(const std::filesystem::path& path);

/// CSV with a "# grid dim=.. points=.. length=.." line, then rows k1,k2,k3,component,re,im
/// for every nonzero coefficient.
void write_field_csv(const std::filesystem::path& path, const SpectralField& f);
SpectralField read_field_csv(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames, so readers never see partial files.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
json read_json(const std::filesystem::path& path);

json to_json(const GridSpec& g);
GridSpec grid_from_json(const json& j, const std::string& where = "grid");

/// Resolved parameters including the derived nu, alpha branches and regime.
json to_json(const PhysParams& p);
/// Accepts either {"mu_bar", "lambda_bar", "kappa_bar", "rho_star"} or
/// {"rho_star", "closures": {"pressure", "mu", "lambda", "kappa"}} coefficient lists.
PhysParams params_from_json(const json& j, const std::string& where = "params");

json to_json(const StepperConfig& c);
StepperConfig stepper_from_json(const json& j, const std::string& where = "stepper");

json to_json(const DecayExperiment& e);
DecayExperiment experiment_from_json(const json& j, const std::string& where = "experiment");

json to_json(const DecayFit& f);

/// Directory holding trajectory.json (params, config, grid, seed, sample list)
/// and one snapshot per sample.
class TrajectoryArchive {
public:
    static TrajectoryArchive create(const std::filesystem::path& dir, const GridSpec& grid, const PhysParams& p,
                                    const StepperConfig& c, std::uint64_t seed);
    static TrajectoryArchive open(const std::filesystem::path& dir);

    void append(double t, const State& s);
    /// Last stored sample, or nothing for an empty archive.
    bool last(double& t, State& s) const;
    std::size_t size() const { return header_["samples"].size(); }
    const json& header() const { return header_; }
    PhysParams params() const { return params_from_json(header_["params"]); }
    StepperConfig config() const { return stepper_from_json(header_["config"]); }
    GridSpec grid() const { return grid_from_json(header_["grid"]); }

private:
    void flush() const;
    std::filesystem::path dir_;
    json header_;
};

}  // namespace nsk
