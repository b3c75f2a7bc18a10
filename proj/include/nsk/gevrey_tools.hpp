#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nsk/littlewood_paley.hpp"
#include "nsk/nsk_model.hpp"
#include "nsk/spectral_core.hpp"

namespace nsk {

enum class GevreyDirection { amplify, smooth };

/// exp(+-tau |xi|_1). `cap` bounds |xi|_1 of the modes an amplification may touch.
struct GevreyWeight {
    double tau = 0.0;
    GevreyDirection direction = GevreyDirection::amplify;
    double cap = infinity;
};

inline constexpr double gevrey_exponent_limit = 700.0;

/// Throws OverflowError naming the first offending mode when an amplified
/// nonzero mode lies above the cap or has tau |xi|_1 > 700.
SpectralField gevrey_apply(const SpectralField& f, const GevreyWeight& w);

/// Weight function exp(tau |xi|_1) for block norms of amplified fields.
ModeWeight gevrey_weight(double tau);

/// c0 = min(mu, nu - alpha, alpha) / 4.
double default_c0(const PhysParams& p, AlphaBranch branch = AlphaBranch::minus);

/// L1 norm of the kernel of exp(-(sqrt(t-s) + sqrt(s) - sqrt(t)) Lambda_1) in
/// dimension dim, from a 1D periodized quadrature raised to the power dim.
double kernel_f_norm(double s, double t, int dim = 1);

/// sup over the lattice of exp(-a|xi|^2/2 + sqrt(a)|xi|_1).
double multiplier32_bound(double a, const GridSpec& grid);

/// exp(tau L1)(exp(-tau L1) f * exp(-tau L1) g), tau = sqrt(c0 t), product dealiased.
SpectralField bilinear_gevrey(const SpectralField& f, const SpectralField& g, double t, double c0);

/// Ratio of ||B_t(f,g)||_2 to ||f||_4 ||g||_4.
double bilinear_holder_ratio(const SpectralField& f, const SpectralField& g, double t, double c0);

struct MaxRegSetup {
    double sigma = 0.0;
    double p = 2.0;
    double r = 2.0;
    double rho1 = infinity;
    double rho2 = 1.0;
    double c0 = 0.25;
    std::vector<double> times;  ///< quadrature nodes on [0, T], first node 0
};

/// Separable forcing F(t, x) = exp(-beta t) profile(x).
struct HeatForcing {
    SpectralField profile;
    double beta = 0.0;
};

/// Exact Fourier solution of dv/dt - mu Lap v = F at time t.
SpectralField heat_solution(const SpectralField& v0, const HeatForcing& f, double mu, double t);

/// LHS / RHS of the Gevrey maximal regularity estimate for the heat flow,
/// with block norms taken over all resolvable blocks. 0 when both sides vanish.
double heat_gevrey_maxreg_check(const SpectralField& v0, const HeatForcing& f, double mu, const MaxRegSetup& setup);

/// Calibrated annulus constant: min(1/sqrt(d), 3/4).
double lemma51_constant(int dim);

/// ||Lambda^zeta e^{-alpha L1} Delta_j u||_p / (2^{j zeta} e^{-c alpha 2^j} ||Delta_j u||_p).
double lemma51_check(const SpectralField& u, int j, double zeta, double alpha, double p = 2.0);

struct Lemma52Setup {
    double sigma = 0.0;
    double q = 2.0;
    double c0 = 0.25;
    int j0 = 0;
    double c = 0.0;  ///< 0 selects lemma51_constant(d)
};

/// Low band: t^{zeta/2} ||Lambda^zeta u||^l_{B^sigma_{q,1}} / ||e^{sqrt(c0 t)L1} u||^l_{B^sigma_{q,inf}};
/// the high band carries the extra factor e^{a sqrt t}, a = (c/2) sqrt(c0) 2^j0.
double lemma52_check(const SpectralField& u, double zeta, double t, Band band, const Lemma52Setup& setup);
double lemma52_high_constant(const Lemma52Setup& setup, int dim);

enum class ProductVariant { m1, m2 };

struct ProductSetup {
    double s1 = 0.0;
    double s2 = 0.0;
    double p = 2.0;
    double q = 2.0;
    ProductVariant variant = ProductVariant::m1;
    double t = 0.0;
    double c0 = 0.25;

    /// Target regularity s implied by the variant's scaling relation.
    double s(int dim) const;
    /// Throws ConfigurationError naming the violated inequality.
    void validate(int dim) const;
};

/// ||e^{sqrt(c0 t)L1}(ab)||_{B^s_{q,inf}} / (||A||_{B^{s1}_{p,1}} ||B||_{B^{s2}_{p or q,inf}}).
double product_estimate_ratio(const SpectralField& a, const SpectralField& b, const ProductSetup& setup);

struct CompositionSetup {
    BesovSpec spec{0.0, 2.0, 2.0};
    double c0 = 0.25;
    double t = 0.0;
    double smallness = 0.5;  ///< bound on ||e^{sqrt(c0 t)L1} z||_{B^{d/p}_{p,1}}
};

/// ||e^{tau L1} F(z)||_{B^s_{p,r}} / ||e^{tau L1} z||_{B^s_{p,r}}, F applied on the grid.
double composition_gevrey_check(const SpectralField& z, const std::function<double(double)>& F,
                                const CompositionSetup& setup);

struct RatioStats {
    double max = 0.0;
    double min = infinity;
    std::size_t argmax = 0;
    std::size_t count = 0;

    void add(double v);
};

}  // namespace nsk
