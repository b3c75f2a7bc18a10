#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nsk/nsk_model.hpp"

namespace nsk {

enum class Scheme { exp_euler, exp_rk2 };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct StepperConfig {
    double dt = 0.1;
    Scheme scheme = Scheme::exp_rk2;
    bool dealias = true;
    bool nonlinear = true;  ///< false switches g off (pure linear flow)
    double t_end = 1.0;
    std::vector<double> sample_times;
    double stability_constant = 0.5;
    double vacuum_threshold = 0.1;

    void validate() const;
};

/// Optional external forcing F(t) added to g. Used by manufactured solutions.
using Forcing = std::function<State(double t)>;

/// One-step map of the exponential integrator. Propagator tables are cached
/// per step size.
class Stepper {
public:
    Stepper(GridSpec grid, PhysParams params, StepperConfig config, Forcing forcing = {});

    State step(const State& s, double t, double h);
    /// exp(hA) applied mode-wise.
    State propagate(const State& s, double h);

    const StepperConfig& config() const { return config_; }
    const PhysParams& params() const { return params_; }

private:
    const std::vector<LinearPropagator>& table(double h);
    State nonlinearity(const State& s, double t) const;

    GridSpec grid_;
    PhysParams params_;
    StepperConfig config_;
    Forcing forcing_;
    std::map<double, std::vector<LinearPropagator>> tables_;
};

/// Largest dt the explicit part tolerates for the given state:
/// stability_constant / (explicit rate estimate). Infinite for the zero state.
double stability_bound(const State& s, const PhysParams& p, double stability_constant);

struct Trajectory {
    std::vector<double> times;
    std::vector<State> samples;
    PhysParams params;
    StepperConfig config;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    double final_time = 0.0;
    State final_state;
};

/// Called at every sample time, whether or not samples are stored.
using Observer = std::function<void(double t, const State& s)>;

struct IntegrateOptions {
    bool store_samples = true;
    Observer observer;
    Forcing forcing;
    double start_time = 0.0;  ///< resuming runs start here; earlier sample times are skipped
    std::uint64_t seed = 0;
};

Trajectory integrate(const State& initial, const StepperConfig& config, const PhysParams& p,
                     const IntegrateOptions& options = {});

struct Calibration {
    double dt = 0.0;
    double difference = 0.0;  ///< relative difference between dt and dt/2 runs
    int halvings = 0;
};

/// Halves config.dt until runs with dt and dt/2 agree to tol at the horizon.
Calibration calibrate_dt(const State& initial, const StepperConfig& config, const PhysParams& p,
                         double horizon, double tol = 1e-6, int max_halvings = 12);

/// Max-coefficient relative distance between two states.
double state_distance(const State& x, const State& y);

}  // namespace nsk
