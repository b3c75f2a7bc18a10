#include "nsk/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsk/error.hpp"

namespace nsk {

std::string to_string(Scheme s) { return s == Scheme::exp_euler ? "exact-linear-Euler" : "exact-linear-RK2"; }

Scheme scheme_from_string(const std::string& s) {
    if (s == "exact-linear-Euler" || s == "euler") return Scheme::exp_euler;
    if (s == "exact-linear-RK2" || s == "rk2") return Scheme::exp_rk2;
    throw ConfigurationError("unknown scheme '" + s + "' (expected exact-linear-Euler or exact-linear-RK2)");
}

void StepperConfig::validate() const {
    std::ostringstream why;
    if (!(dt > 0.0)) why << "dt must be positive; ";
    if (!(t_end >= 0.0)) why << "t_end must be >= 0; ";
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < 0.0 || sample_times[i] > t_end) why << "sample time " << sample_times[i] << " outside [0, t_end]; ";
        if (i > 0 && !(sample_times[i] > sample_times[i - 1])) why << "sample_times must be strictly increasing; ";
    }
    if (!(stability_constant > 0.0)) why << "stability_constant must be positive; ";
    if (!why.str().empty()) throw ConfigurationError("StepperConfig: " + why.str());
}

Stepper::Stepper(GridSpec grid, PhysParams params, StepperConfig config, Forcing forcing)
    : grid_(grid), params_(std::move(params)), config_(std::move(config)), forcing_(std::move(forcing)) {
    grid_.validate();
}

const std::vector<LinearPropagator>& Stepper::table(double h) {
    if (auto it = tables_.find(h); it != tables_.end()) return it->second;
    if (tables_.size() >= 8) tables_.clear();
    std::vector<LinearPropagator> tab(grid_.size());
    for_each_mode(grid_, [&](std::size_t idx, const Wavevector& w) { tab[idx] = linear_propagator(w, h, params_); });
    return tables_.emplace(h, std::move(tab)).first->second;
}

State Stepper::propagate(const State& s, double h) {
    if (h == 0.0) return s;
    const auto& tab = table(h);
    const int d = grid_.dim;
    const Complex I(0.0, 1.0);
    State out = s;
    for_each_mode(grid_, [&](std::size_t idx, const Wavevector& w) {
        const LinearPropagator& lp = tab[idx];
        const double q2 = w.odd_norm_sq();
        Complex dot{};
        for (int i = 0; i < d; ++i) dot += w.xi_odd[static_cast<std::size_t>(i)] * s.m.at(i, idx);
        const Complex a0 = s.a.at(0, idx);
        const Complex y0 = I * dot;
        out.a.at(0, idx) = lp.e[0] * a0 + lp.e[1] * y0;
        const Complex y1 = lp.e[2] * a0 + lp.e[3] * y0;
        for (int i = 0; i < d; ++i) {
            const double xi = w.xi_odd[static_cast<std::size_t>(i)];
            Complex qm0{}, qm1{};
            if (q2 > 0.0) {
                qm0 = xi * dot / q2;
                qm1 = -I * xi * y1 / q2;
            }
            out.m.at(i, idx) = lp.solenoidal * (s.m.at(i, idx) - qm0) + qm1;
        }
    });
    return out;
}

State Stepper::nonlinearity(const State& s, double t) const {
    State n = State::zero(grid_);
    if (config_.nonlinear) n.m = nonlinear_g(s, params_, config_.dealias);
    if (forcing_) n += forcing_(t);
    return n;
}

State Stepper::step(const State& s, double t, double h) {
    if (h < 0.0) throw DomainError("Stepper::step: negative step");
    if (h == 0.0) return s;
    const bool explicit_part = config_.nonlinear || static_cast<bool>(forcing_);
    if (!explicit_part) return propagate(s, h);
    if (config_.scheme == Scheme::exp_euler) return propagate(s + h * nonlinearity(s, t), h);
    const State mid = propagate(s + (0.5 * h) * nonlinearity(s, t), 0.5 * h);
    return propagate(s, h) + h * propagate(nonlinearity(mid, t + 0.5 * h), 0.5 * h);
}

double stability_bound(const State& s, const PhysParams& p, double stability_constant) {
    if (s.max_abs() == 0.0) return infinity;
    const GridSpec& g = s.grid();
    const RealField a = transform_inverse(s.a);
    const RealField m = transform_inverse(s.m);
    double amax = 0.0, lo = infinity;
    for (double v : a.values()) {
        amax = std::max(amax, std::abs(v));
        lo = std::min(lo, 1.0 + v);
    }
    const double umax = lebesgue_norm(m, infinity) / std::max(lo, 1e-300);
    double kmax = 0.0;
    for_each_mode(g, [&](std::size_t idx, const Wavevector& w) {
        bool live = s.a.at(0, idx) != Complex{};
        for (int c = 0; c < g.dim && !live; ++c) live = s.m.at(c, idx) != Complex{};
        if (live) kmax = std::max(kmax, w.norm());
    });
    const double q = amax / std::max(lo, 1e-300);
    // advection, viscous and capillary terms with coefficients of size |a|
    const double rate = kmax * umax + p.nu_bar() * kmax * kmax * q + 3.0 * p.kappa_bar() * std::pow(kmax, 4) * q;
    return rate > 0.0 ? stability_constant / rate : infinity;
}

double state_distance(const State& x, const State& y) {
    double num = 0.0;
    for (std::size_t i = 0; i < x.a.data().size(); ++i) num = std::max(num, std::abs(x.a.data()[i] - y.a.data()[i]));
    for (std::size_t i = 0; i < x.m.data().size(); ++i) num = std::max(num, std::abs(x.m.data()[i] - y.m.data()[i]));
    const double den = std::max(y.max_abs(), 1e-300);
    return num / den;
}

Trajectory integrate(const State& initial, const StepperConfig& config, const PhysParams& p,
                     const IntegrateOptions& options) {
    config.validate();
    initial.validate();
    Trajectory traj;
    traj.params = p;
    traj.config = config;
    traj.seed = options.seed;
    Stepper stepper(initial.grid(), p, config, options.forcing);

    std::vector<double> targets;
    for (double t : config.sample_times)
        if (t >= options.start_time) targets.push_back(t);
    if (targets.empty() || targets.back() < config.t_end) targets.push_back(config.t_end);
    const std::size_t nsamples_wanted = std::count_if(config.sample_times.begin(), config.sample_times.end(),
                                                      [&](double t) { return t >= options.start_time; });

    State s = initial;
    double t = options.start_time;
    auto record = [&](double time, const State& st, std::size_t k) {
        if (k >= nsamples_wanted) return;
        if (options.observer) options.observer(time, st);
        if (options.store_samples) {
            traj.times.push_back(time);
            traj.samples.push_back(st);
        }
    };
    auto fail = [&](const std::string& why) {
        traj.failed = true;
        std::ostringstream msg;
        msg << why << " at t = " << t;
        traj.failure = msg.str();
    };

    for (std::size_t k = 0; k < targets.size() && !traj.failed; ++k) {
        const double target = targets[k];
        if (target > t) {
            const double span = target - t;
            // the linear flow is exact, so pure linear runs take one step per interval
            const double hmax = (config.nonlinear || options.forcing) ? config.dt : span;
            const auto n = static_cast<long>(std::max(1.0, std::ceil(span / hmax - 1e-9)));
            const double h = span / static_cast<double>(n);
            for (long i = 0; i < n; ++i) {
                s = stepper.step(s, t, h);
                t = (i + 1 == n) ? target : t + h;
                if (!std::isfinite(s.max_abs())) {
                    fail("non-finite coefficients");
                    break;
                }
                if (config.nonlinear) {
                    const double lo = min_density_ratio(s);
                    if (lo < config.vacuum_threshold) {
                        std::ostringstream why;
                        why << "vacuum guard: min(1 + a) = " << lo << " < " << config.vacuum_threshold;
                        fail(why.str());
                        break;
                    }
                }
            }
        }
        if (!traj.failed) record(target, s, k);
    }
    traj.final_time = t;
    traj.final_state = s;
    return traj;
}

Calibration calibrate_dt(const State& initial, const StepperConfig& config, const PhysParams& p, double horizon,
                         double tol, int max_halvings) {
    StepperConfig c = config;
    c.t_end = horizon;
    c.sample_times.clear();
    IntegrateOptions quiet;
    quiet.store_samples = false;
    Calibration cal;
    cal.dt = config.dt;
    for (cal.halvings = 0; cal.halvings <= max_halvings; ++cal.halvings) {
        c.dt = cal.dt;
        const Trajectory coarse = integrate(initial, c, p, quiet);
        c.dt = 0.5 * cal.dt;
        const Trajectory fine = integrate(initial, c, p, quiet);
        if (coarse.failed || fine.failed) throw StateError("calibrate_dt: run failed: " + coarse.failure + fine.failure);
        cal.difference = state_distance(coarse.final_state, fine.final_state);
        if (cal.difference <= tol) return cal;
        cal.dt *= 0.5;
    }
    throw StateError("calibrate_dt: no self-convergent dt found");
}

}  // namespace nsk
