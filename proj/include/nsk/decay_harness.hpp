#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsk/integrator.hpp"
#include "nsk/littlewood_paley.hpp"
#include "nsk/nsk_model.hpp"

namespace nsk {

enum class DecayMode { linear_oracle, grid_linear, grid_nonlinear };
std::string to_string(DecayMode m);
DecayMode decay_mode_from_string(const std::string& s);

enum class Target { density, momentum };
std::string to_string(Target t);

struct DecayExperiment {
    double sigma1 = 1.0;
    double q = 2.0;
    double p = 2.0;
    double r = 2.0;
    std::vector<double> l_values{0.0, 2.0};
    double amplitude = 1e-3;  ///< rms of m0 on the grid
    double t0 = 0.25;
    double t_min = 1.0;
    double t_max = 100.0;
    int samples_per_decade = 20;
    double xi_cut = 0.0;  ///< spectral cutoff of the data; <= 0 selects the 2/3 edge of the grid
    std::uint64_t seed = 1;
    DecayMode mode = DecayMode::linear_oracle;

    /// Admissible sigma1 and derivative orders for dimension dim.
    void validate(int dim) const;
    double sigma_tilde(int dim) const { return sigma1 - dim / r + dim / q; }
    /// -sigma~/2 - l/2 for density, one half lower for momentum.
    double predicted(Target target, double l, int dim) const;
    /// Log-spaced sample instants over [t_min, t_max].
    std::vector<double> sample_times() const;
    double cutoff(const GridSpec& grid) const;
};

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< max relative deviation from the fitted power law
    double predicted = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    std::size_t samples = 0;
};

/// Least squares of log y against log <t - t0> over [t_min, t_max].
/// Requires at least 10 samples per decade in the window.
DecayFit fit_decay(std::span<const double> t, std::span<const double> y, double t0, double t_min, double t_max,
                   double predicted = 0.0);

/// Least squares of log y against x (used for exponential-in-t and in-sqrt-t fits).
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LineFit fit_log_linear(std::span<const double> x, std::span<const double> y);

/// Random-phase Hermitian data with |m0(xi)| ~ |xi|^{sigma1 + 1 - d/2} and
/// |a0(xi)| ~ |xi|^{sigma1 - d/2} below the cutoff, scaled so rms(m0) = amplitude.
State make_initial_data(const DecayExperiment& exp, const GridSpec& grid);

/// 2^{-j(sigma1+1)} ||Delta_j f||_2 for the low blocks j < j0.
std::vector<double> low_block_profile(const SpectralField& f, double sigma1, int j0);

struct SeriesFit {
    Target target = Target::density;
    double l = 0.0;
    std::vector<double> times;
    std::vector<double> values;
    DecayFit fit;
};

/// Whole-space linear evolution of the data's expected spectrum, by radial
/// quadrature of the exact Fourier solution.
std::vector<SeriesFit> linear_decay_oracle(const DecayExperiment& exp, const PhysParams& p, int dim,
                                           double xi_cut);

/// ||Lambda^l x||_{L^r}: Plancherel for r = 2, grid norm otherwise.
double derivative_norm(const SpectralField& f, double l, double r);

/// Low-frequency Gevrey norm ||e^{sqrt(c0 t)L1}(grad a, m)||^l_{B^{-sigma1-1}_{q,inf}}.
double gevrey_low_norm(const State& s, double t, double c0, double sigma1, double q, int j0);

struct GevreySeries {
    double c0 = 0.0;
    std::vector<double> times;
    std::vector<double> values;
    bool overflow = false;
    std::string notice;
    double max_over_initial() const;
    bool bounded(double factor) const;
};

/// Accumulates Gevrey norms for a ladder of c0 at every observed sample.
class GevreyTracker {
public:
    GevreyTracker(std::vector<double> c0_ladder, double sigma1, double q, int j0);
    void observe(double t, const State& s);
    const std::vector<GevreySeries>& series() const { return series_; }

private:
    std::vector<GevreySeries> series_;
    double sigma1_, q_;
    int j0_;
};

struct GevreyVerdict {
    std::vector<bool> bounded;  ///< per ladder entry (ascending c0)
    bool monotone = true;       ///< bounded at c0 implies bounded at every smaller c0
    double largest_bounded_c0 = 0.0;
};
GevreyVerdict gevrey_verdict(const std::vector<GevreySeries>& series, double factor = 3.0);

/// ||a||^h_{B^0_{r,1}} (blocks j >= j0).
double high_band_norm(const SpectralField& a, double r, int j0);

struct HighFreqFit {
    bool skipped = false;
    std::string notice;
    double slope_t = 0.0;       ///< d log ||a||^h / dt
    double slope_sqrt_t = 0.0;  ///< d log ||a||^h / d sqrt(t)
    double threshold_rate = 0.0;
    double a_constant = 0.0;  ///< (c/2) sqrt(c0) 2^j0
};

/// Slowest linear rate on the inner edge of the high band: min(mu, alpha, nu - alpha) (3/4 2^j0)^2.
double high_band_threshold_rate(const PhysParams& p, int j0);

HighFreqFit high_freq_decay_check(std::span<const double> times, std::span<const double> high_norms,
                                  double t_late_min, double t_late_max, const PhysParams& p, int j0, double c0,
                                  int dim);

struct SuiteReport {
    DecayExperiment experiment;
    GridSpec grid;
    double box_ratio = 0.0;  ///< sqrt(nu t_max) / L
    std::vector<SeriesFit> fits;
    double slope_gap = 0.0;  ///< momentum slope - density slope at l = 0
    bool failed = false;
    std::string failure;
    std::vector<GevreySeries> gevrey;
};

/// Integrates the data on the grid, records ||Lambda^l .||_{L^r} at the
/// sample times and fits the slopes. A tracker, when given, sees every sample.
SuiteReport run_decay_suite(const DecayExperiment& exp, const PhysParams& p, const GridSpec& grid,
                            const StepperConfig& stepper, GevreyTracker* tracker = nullptr);

}  // namespace nsk
