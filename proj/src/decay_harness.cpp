#include "nsk/decay_harness.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "nsk/error.hpp"
#include "nsk/gevrey_tools.hpp"
#include "nsk/random_fields.hpp"

namespace nsk {

std::string to_string(DecayMode m) {
    switch (m) {
        case DecayMode::linear_oracle: return "linear-oracle";
        case DecayMode::grid_linear: return "grid-linear";
        case DecayMode::grid_nonlinear: return "grid-nonlinear";
    }
    return "unknown";
}

DecayMode decay_mode_from_string(const std::string& s) {
    if (s == "linear-oracle") return DecayMode::linear_oracle;
    if (s == "grid-linear") return DecayMode::grid_linear;
    if (s == "grid-nonlinear") return DecayMode::grid_nonlinear;
    throw ConfigurationError("unknown decay mode '" + s + "'");
}

std::string to_string(Target t) { return t == Target::density ? "density" : "momentum"; }

// ---------------------------------------------------------------------------
// Experiment description

void DecayExperiment::validate(int dim) const {
    const double d = dim;
    std::ostringstream why;
    if (!(q > 1.0) || !(p > 1.0) || !(r >= 1.0)) why << "need q, p > 1 and r >= 1; ";
    const double lo = 2.0 - d / q;
    if (p <= 2.0) {
        if (sigma1 < lo || sigma1 >= d - d / q)
            why << "sigma1 = " << sigma1 << " outside [" << lo << ", " << d - d / q << "); ";
    } else if (sigma1 < lo || sigma1 > 2.0 * d / p - d / q) {
        why << "sigma1 = " << sigma1 << " outside [" << lo << ", " << 2.0 * d / p - d / q << "]; ";
    }
    const double st = sigma_tilde(dim);
    for (double l : l_values)
        if (!(l > -st)) why << "derivative order l = " << l << " must exceed -sigma~ = " << -st << "; ";
    if (!(amplitude >= 0.0)) why << "amplitude must be >= 0; ";
    if (!(t_max > t_min) || !(t_min > 0.0)) why << "fit window must satisfy 0 < t_min < t_max; ";
    if (!(t0 >= 0.0 && t0 < 0.5)) why << "t0 must lie in [0, 1/2); ";
    if (samples_per_decade < 10) why << "need at least 10 samples per decade; ";
    if (!why.str().empty()) throw ConfigurationError("DecayExperiment: " + why.str());
}

double DecayExperiment::predicted(Target target, double l, int dim) const {
    const double base = -0.5 * sigma_tilde(dim) - 0.5 * l;
    return target == Target::density ? base : base - 0.5;
}

std::vector<double> DecayExperiment::sample_times() const {
    const double decades = std::log10(t_max / t_min);
    const int n = static_cast<int>(std::lround(samples_per_decade * decades)) + 1;
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = t_min * std::pow(t_max / t_min, static_cast<double>(i) / (n - 1));
    t.back() = t_max;
    return t;
}

double DecayExperiment::cutoff(const GridSpec& grid) const {
    const double edge = grid.dealias_cutoff() * grid.fundamental();
    if (xi_cut <= 0.0) return edge;
    if (xi_cut > edge * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "DecayExperiment: xi_cut = " << xi_cut << " exceeds the 2/3 band edge " << edge;
        throw ConfigurationError(msg.str());
    }
    return xi_cut;
}

// ---------------------------------------------------------------------------
// Fits

LineFit fit_log_linear(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigurationError("fit_log_linear: need >= 2 paired samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0.0)) throw DomainError("fit_log_linear: values must be positive");
        const double ly = std::log(y[i]);
        sx += x[i];
        sy += ly;
        sxx += x[i] * x[i];
        sxy += x[i] * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

DecayFit fit_decay(std::span<const double> t, std::span<const double> y, double t0, double t_min, double t_max,
                   double predicted) {
    if (t.size() != y.size() || t.empty()) throw ConfigurationError("fit_decay: mismatched series");
    if (t_min < t.front() * (1.0 - 1e-12) || t_max > t.back() * (1.0 + 1e-12))
        throw ConfigurationError("fit_decay: window outside the sampled range");
    std::vector<double> x, v;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_min * (1.0 - 1e-12) || t[i] > t_max * (1.0 + 1e-12)) continue;
        const double s = t[i] - t0;
        x.push_back(0.5 * std::log1p(s * s));
        v.push_back(y[i]);
    }
    const double decades = std::log10(t_max / t_min);
    if (static_cast<double>(x.size()) < 10.0 * decades)
        throw ConfigurationError("fit_decay: fewer than 10 samples per decade in the window");
    const LineFit lf = fit_log_linear(x, v);
    DecayFit fit;
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.predicted = predicted;
    fit.t_min = t_min;
    fit.t_max = t_max;
    fit.samples = x.size();
    for (std::size_t i = 0; i < x.size(); ++i)
        fit.residual = std::max(fit.residual, std::abs(v[i] / std::exp(lf.intercept + lf.slope * x[i]) - 1.0));
    return fit;
}

// ---------------------------------------------------------------------------
// Initial data

State make_initial_data(const DecayExperiment& exp, const GridSpec& grid) {
    grid.validate();
    exp.validate(grid.dim);
    if (exp.q != 2.0) throw ConfigurationError("make_initial_data: only q = 2 data profiles are implemented");
    State s = State::zero(grid);
    if (exp.amplitude == 0.0) return s;
    const int d = grid.dim;
    const double xc = exp.cutoff(grid);
    auto inside = [&](const Wavevector& w) { return !w.is_zero() && !w.on_nyquist && w.norm() <= xc; };
    Rng rng(exp.seed);
    s.a = random_phase_field(grid, 1, [&](const Wavevector& w) {
        return inside(w) ? std::pow(w.norm(), exp.sigma1 - 0.5 * d) : 0.0;
    }, rng);
    s.m = random_phase_field(grid, d, [&](const Wavevector& w) {
        return inside(w) ? std::pow(w.norm(), exp.sigma1 + 1.0 - 0.5 * d) / std::sqrt(static_cast<double>(d)) : 0.0;
    }, rng);
    double energy = 0.0;
    for (const auto& c : s.m.data()) energy += std::norm(c);
    const double scale = exp.amplitude / std::sqrt(energy);
    s.a *= scale;
    s.m *= scale;
    return s;
}

std::vector<double> low_block_profile(const SpectralField& f, double sigma1, int j0) {
    const auto part = DyadicPartition::for_grid(f.grid());
    const BlockRange range = band_range(part, Band::low, j0);
    auto blocks = block_norms(f, 2.0, range);
    for (std::size_t i = 0; i < blocks.size(); ++i)
        blocks[i] *= std::exp2(-(range.lo + static_cast<int>(i)) * (sigma1 + 1.0));
    return blocks;
}

// ---------------------------------------------------------------------------
// Radial quadrature oracle

namespace {

struct GlTable {
    explicit GlTable(std::size_t n) : table(gsl_integration_glfixed_table_alloc(n)), order(n) {}
    ~GlTable() { gsl_integration_glfixed_table_free(table); }
    GlTable(const GlTable&) = delete;
    GlTable& operator=(const GlTable&) = delete;
    gsl_integration_glfixed_table* table;
    std::size_t order;
};

/// Expected |a_hat|^2 and |m_hat|^2 at radius r and time t (unit prefactor).
std::pair<double, double> expected_spectrum(double r, double t, const PhysParams& p, const DecayExperiment& exp,
                                            int dim) {
    const double d = dim;
    const double r2 = r * r;
    const double A = std::pow(r, exp.sigma1 - 0.5 * d);
    const double M = std::pow(r, exp.sigma1 + 1.0 - 0.5 * d);
    const std::array<double, 4> mat{0.0, -1.0, p.kappa_bar() * r2 * r2, -p.nu_bar() * r2};
    const auto e = expm2(mat, t);
    const double y2 = r2 * M * M / d;  // E|i xi . m0|^2
    const double ea = e[0] * e[0] * A * A + e[1] * e[1] * y2;
    const double ey = e[2] * e[2] * A * A + e[3] * e[3] * y2;
    const double sol = std::exp(-2.0 * p.mu_bar() * r2 * t) * (d - 1.0) / d * M * M;
    return {ea, sol + ey / r2};
}

double radial_integral(const std::function<double(double)>& f, double lo, double hi, const GlTable& gl) {
    // composite Gauss-Legendre in u = log r, panels doubled until the sum settles
    const double ulo = std::log(lo), uhi = std::log(hi);
    double previous = 0.0;
    for (int panels = 8; panels <= (1 << 14); panels *= 2) {
        const double w = (uhi - ulo) / panels;
        double acc = 0.0;
        for (int k = 0; k < panels; ++k) {
            const double a = ulo + k * w;
            for (std::size_t i = 0; i < gl.order; ++i) {
                double x = 0.0, wi = 0.0;
                gsl_integration_glfixed_point(a, a + w, i, &x, &wi, gl.table);
                const double r = std::exp(x);
                acc += wi * f(r) * r;
            }
        }
        if (panels > 8 && std::abs(acc - previous) <= 1e-10 * std::abs(acc)) return acc;
        previous = acc;
    }
    std::ostringstream msg;
    msg << "radial quadrature did not converge on [" << lo << ", " << hi << "]";
    throw RefinementError(msg.str());
}

}  // namespace

std::vector<SeriesFit> linear_decay_oracle(const DecayExperiment& exp, const PhysParams& p, int dim, double xi_cut) {
    exp.validate(dim);
    if (!(xi_cut > 0.0)) throw ConfigurationError("linear_decay_oracle: xi_cut must be positive");
    if (exp.q != 2.0 || exp.r != 2.0) throw ConfigurationError("linear_decay_oracle: requires q = r = 2");
    const GlTable gl(16);
    const auto times = exp.sample_times();
    const double lo = xi_cut * 1e-12;
    std::vector<SeriesFit> out;
    for (Target target : {Target::density, Target::momentum}) {
        for (double l : exp.l_values) {
            SeriesFit sf;
            sf.target = target;
            sf.l = l;
            sf.times = times;
            for (double t : times) {
                auto integrand = [&](double r) {
                    const auto [ea, em] = expected_spectrum(r, t, p, exp, dim);
                    return (target == Target::density ? ea : em) * std::pow(r, 2.0 * l + dim - 1.0);
                };
                sf.values.push_back(std::sqrt(radial_integral(integrand, lo, xi_cut, gl)));
            }
            sf.fit = fit_decay(sf.times, sf.values, exp.t0, exp.t_min, exp.t_max, exp.predicted(target, l, dim));
            out.push_back(std::move(sf));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grid norms

double derivative_norm(const SpectralField& f, double l, double r) {
    const SpectralField g = l == 0.0 ? f : apply_symbol(f, symbols::lambda_power(l));
    return r == 2.0 ? g.plancherel_norm() : lebesgue_norm(g, r);
}

double gevrey_low_norm(const State& s, double t, double c0, double sigma1, double q, int j0) {
    const GridSpec& g = s.grid();
    const int d = g.dim;
    SpectralField pair(g, 2 * d);
    const SpectralField ga = gradient(s.a);
    for (int i = 0; i < d; ++i) {
        pair.assign(i, ga.extract(i));
        pair.assign(d + i, s.m.extract(i));
    }
    const double tau = std::sqrt(c0 * t);
    double reach = 0.0;
    for_each_mode(g, [&](std::size_t idx, const Wavevector& w) {
        for (int c = 0; c < 2 * d; ++c)
            if (pair.at(c, idx) != Complex{}) {
                reach = std::max(reach, w.norm_l1());
                break;
            }
    });
    if (tau * reach > gevrey_exponent_limit) {
        std::ostringstream msg;
        msg << "Gevrey weight overflow: tau |xi|_1 = " << tau * reach << " > " << gevrey_exponent_limit;
        throw OverflowError(msg.str());
    }
    return besov_norm(pair, {-sigma1 - 1.0, q, infinity}, Band::low, j0, gevrey_weight(tau));
}

double GevreySeries::max_over_initial() const {
    if (values.empty() || values.front() == 0.0) return 0.0;
    return *std::max_element(values.begin(), values.end()) / values.front();
}

bool GevreySeries::bounded(double factor) const { return !overflow && max_over_initial() <= factor; }

GevreyTracker::GevreyTracker(std::vector<double> c0_ladder, double sigma1, double q, int j0)
    : sigma1_(sigma1), q_(q), j0_(j0) {
    std::sort(c0_ladder.begin(), c0_ladder.end());
    for (double c0 : c0_ladder) {
        GevreySeries gs;
        gs.c0 = c0;
        series_.push_back(std::move(gs));
    }
}

void GevreyTracker::observe(double t, const State& s) {
    for (auto& gs : series_) {
        if (gs.overflow) continue;
        try {
            gs.values.push_back(gevrey_low_norm(s, t, gs.c0, sigma1_, q_, j0_));
            gs.times.push_back(t);
        } catch (const OverflowError& e) {
            gs.overflow = true;
            gs.notice = e.what();
        }
    }
}

GevreyVerdict gevrey_verdict(const std::vector<GevreySeries>& series, double factor) {
    GevreyVerdict v;
    for (const auto& s : series) v.bounded.push_back(s.bounded(factor));
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!v.bounded[i]) continue;
        v.largest_bounded_c0 = std::max(v.largest_bounded_c0, series[i].c0);
        for (std::size_t j = 0; j < i; ++j)
            if (!v.bounded[j]) v.monotone = false;
    }
    return v;
}

double high_band_norm(const SpectralField& a, double r, int j0) { return besov_norm(a, {0.0, r, 1.0}, Band::high, j0); }

double high_band_threshold_rate(const PhysParams& p, int j0) {
    const double alpha = make_alpha(p, AlphaBranch::minus).value;
    const double slowest = std::min({p.mu_bar(), alpha, p.nu_bar() - alpha});
    const double edge = 0.75 * std::exp2(j0);
    return slowest * edge * edge;
}

HighFreqFit high_freq_decay_check(std::span<const double> times, std::span<const double> high_norms,
                                  double t_late_min, double t_late_max, const PhysParams& p, int j0, double c0,
                                  int dim) {
    HighFreqFit fit;
    fit.threshold_rate = high_band_threshold_rate(p, j0);
    fit.a_constant = 0.5 * lemma51_constant(dim) * std::sqrt(c0) * std::exp2(j0);
    if (high_norms.empty() || high_norms.front() == 0.0) {
        fit.skipped = true;
        fit.notice = "high band empty at t = 0; check skipped";
        return fit;
    }
    std::vector<double> t, st, y;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_late_min || times[i] > t_late_max) continue;
        t.push_back(times[i]);
        st.push_back(std::sqrt(times[i]));
        y.push_back(high_norms[i]);
    }
    fit.slope_t = fit_log_linear(t, y).slope;
    fit.slope_sqrt_t = fit_log_linear(st, y).slope;
    return fit;
}

// ---------------------------------------------------------------------------
// Grid suite

SuiteReport run_decay_suite(const DecayExperiment& exp, const PhysParams& p, const GridSpec& grid,
                            const StepperConfig& stepper, GevreyTracker* tracker) {
    if (exp.mode == DecayMode::linear_oracle)
        throw ConfigurationError("run_decay_suite: mode must be grid-linear or grid-nonlinear");
    exp.validate(grid.dim);
    SuiteReport rep;
    rep.experiment = exp;
    rep.grid = grid;
    rep.box_ratio = std::sqrt(p.nu_bar() * exp.t_max) / grid.length;
    if (rep.box_ratio > 0.125 * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "run_decay_suite: sqrt(nu t_max)/L = " << rep.box_ratio << " exceeds 1/8";
        throw ConfigurationError(msg.str());
    }
    const State initial = make_initial_data(exp, grid);
    if (exp.amplitude == 0.0) return rep;

    std::vector<double> window = exp.sample_times();
    std::vector<double> samples{0.0};
    for (int i = 10; i > 0; --i) {
        const double t = exp.t_min * std::pow(10.0, -i / 10.0);
        if (t > 0.0) samples.push_back(t);
    }
    samples.insert(samples.end(), window.begin(), window.end());

    StepperConfig cfg = stepper;
    cfg.nonlinear = exp.mode == DecayMode::grid_nonlinear;
    cfg.t_end = exp.t_max;
    cfg.sample_times = samples;

    std::vector<SeriesFit> series;
    for (Target target : {Target::density, Target::momentum})
        for (double l : exp.l_values) {
            SeriesFit sf;
            sf.target = target;
            sf.l = l;
            series.push_back(std::move(sf));
        }

    IntegrateOptions opts;
    opts.store_samples = false;
    opts.seed = exp.seed;
    opts.observer = [&](double t, const State& s) {
        if (tracker) tracker->observe(t, s);
        if (t < exp.t_min * (1.0 - 1e-12)) return;
        for (auto& sf : series) {
            const SpectralField& f = sf.target == Target::density ? s.a : s.m;
            sf.times.push_back(t);
            sf.values.push_back(derivative_norm(f, sf.l, exp.r));
        }
    };
    const Trajectory traj = integrate(initial, cfg, p, opts);
    if (traj.failed) {
        rep.failed = true;
        rep.failure = traj.failure;
        return rep;
    }
    for (auto& sf : series)
        sf.fit = fit_decay(sf.times, sf.values, exp.t0, exp.t_min, exp.t_max, exp.predicted(sf.target, sf.l, grid.dim));
    double slope_a = 0.0, slope_m = 0.0;
    bool have_a = false, have_m = false;
    for (const auto& sf : series) {
        if (sf.l != 0.0) continue;
        if (sf.target == Target::density) {
            slope_a = sf.fit.slope;
            have_a = true;
        } else {
            slope_m = sf.fit.slope;
            have_m = true;
        }
    }
    if (have_a && have_m) rep.slope_gap = slope_m - slope_a;
    rep.fits = std::move(series);
    if (tracker) rep.gevrey = tracker->series();
    return rep;
}

}  // namespace nsk
