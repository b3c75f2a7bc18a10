#pragma once

#include <array>
#include <string>
#include <vector>

#include "nsk/spectral_core.hpp"

namespace nsk {

/// Analytic closure given by its Taylor coefficients about rho*:
/// f(rho) = sum_k c_k (rho - rho*)^k.
struct Closure {
    std::vector<double> coeffs;

    double at_reference() const { return coeffs.empty() ? 0.0 : coeffs[0]; }
    double slope_at_reference() const { return coeffs.size() > 1 ? coeffs[1] : 0.0; }
    /// f(rho* + delta)
    double value(double delta) const;
    /// f(rho* + delta) - f(rho*), summed without cancellation.
    double increment(double delta) const;
    double derivative(double delta) const;
    /// f'(rho* + delta) - f'(rho*)
    double derivative_increment(double delta) const;
};

enum class Regime { parabolic, degenerate, oscillatory };
std::string to_string(Regime r);

struct PhysParams {
    double rho_star = 1.0;
    Closure pressure;
    Closure mu;
    Closure lambda;
    Closure kappa;

    /// Constant closures reproducing the given scaled coefficients, P == 0.
    static PhysParams from_scaled(double mu_bar, double lambda_bar, double kappa_bar, double rho_star = 1.0);

    double mu_bar() const { return mu.at_reference() / rho_star; }
    double lambda_bar() const { return lambda.at_reference() / rho_star; }
    double kappa_bar() const { return kappa.at_reference() * rho_star; }
    double kappa_check() const { return kappa.at_reference() + rho_star * kappa.slope_at_reference(); }
    double nu_bar() const { return lambda_bar() + 2.0 * mu_bar(); }
    double discriminant() const { return nu_bar() * nu_bar() - 4.0 * kappa_bar(); }
    Regime regime() const;

    /// Throws ConfigurationError on hard violations; returns warnings (lambda_bar <= 0).
    std::vector<std::string> validate() const;
};

enum class AlphaBranch { plus, minus };

struct Alpha {
    double value = 0.0;
    AlphaBranch branch = AlphaBranch::minus;
};

/// alpha = (nu +- sqrt(nu^2 - 4 kappa)) / 2. Throws RegimeError when complex.
Alpha make_alpha(const PhysParams& p, AlphaBranch branch = AlphaBranch::minus);

struct State {
    SpectralField a;  ///< density fluctuation (scalar)
    SpectralField m;  ///< scaled momentum (d components)

    static State zero(const GridSpec& grid);
    const GridSpec& grid() const { return a.grid(); }
    /// Real-valued, zero-mean, matching shapes.
    void validate() const;
    double max_abs() const { return std::max(a.max_abs(), m.max_abs()); }

    State& operator+=(const State& o);
    State& operator*=(double s);
    friend State operator+(State x, const State& y) { return x += y; }
    friend State operator*(double s, State x) { return x *= s; }
};

/// (-div m, A m + kappa grad Lap a).
State linear_rhs(const State& s, const PhysParams& p);

/// Source terms g_1..g_6, each a d-component field.
using NonlinearTerms = std::array<SpectralField, 6>;

/// Every g_i separately.
NonlinearTerms nonlinear_terms(const State& s, const PhysParams& p, bool dealias = true);
/// g = g_1 + ... + g_6, assembled with one set of transforms.
SpectralField nonlinear_g(const State& s, const PhysParams& p, bool dealias = true);

/// Smallest 1 + a on the grid.
double min_density_ratio(const State& s);

/// w = Q m + alpha grad a.
SpectralField effective_velocity(const State& s, const Alpha& alpha);
SpectralField effective_velocity(const State& s, const PhysParams& p, AlphaBranch branch);

struct SpectralEigenvalues {
    Complex plus;           ///< -alpha_+ |xi|^2
    Complex minus;          ///< -alpha_- |xi|^2
    double incompressible;  ///< -mu |xi|^2
    int incompressible_multiplicity;
    Regime regime;
};

/// Roots of lambda^2 + nu xi^2 lambda + kappa xi^4 = 0.
SpectralEigenvalues spectral_eigenvalues(double xi_sq, const PhysParams& p, int dim = 3);

/// exp(tM) for the compressible block acting on (a_hat, i xi . m_hat), plus the
/// solenoidal factor exp(-mu |xi|^2 t).
struct LinearPropagator {
    std::array<double, 4> e{1.0, 0.0, 0.0, 1.0};  ///< row-major 2x2
    double solenoidal = 1.0;
};

/// Exponential of [[a, b], [c, d]] times t, robust near a double root.
std::array<double, 4> expm2(const std::array<double, 4>& m, double t);

LinearPropagator linear_propagator(const Wavevector& w, double t, const PhysParams& p);

/// Applies the exact linear flow of duration t to every mode.
State propagate_linear(const State& s, double t, const PhysParams& p);

}  // namespace nsk
