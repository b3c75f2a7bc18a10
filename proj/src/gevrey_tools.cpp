#include "nsk/gevrey_tools.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsk/error.hpp"

namespace nsk {

namespace {

std::string describe_mode(const Wavevector& w) {
    std::ostringstream os;
    os << "k = (";
    for (int i = 0; i < w.dim; ++i) os << (i ? ", " : "") << w.k[static_cast<std::size_t>(i)];
    os << "), |xi|_1 = " << w.norm_l1();
    return os.str();
}

}  // namespace

SpectralField gevrey_apply(const SpectralField& f, const GevreyWeight& w) {
    if (!(w.tau >= 0.0)) throw DomainError("gevrey_apply: tau must be >= 0");
    if (w.tau == 0.0) return f;
    SpectralField out = f;
    const double sign = w.direction == GevreyDirection::amplify ? 1.0 : -1.0;
    for_each_mode(f.grid(), [&](std::size_t idx, const Wavevector& wv) {
        bool live = false;
        for (int c = 0; c < f.components() && !live; ++c) live = f.at(c, idx) != Complex{};
        if (!live) return;
        const double l1 = wv.norm_l1();
        if (sign > 0.0) {
            if (l1 > w.cap) throw OverflowError("gevrey_apply: nonzero mode above the amplification cap at " + describe_mode(wv));
            if (w.tau * l1 > gevrey_exponent_limit)
                throw OverflowError("gevrey_apply: tau |xi|_1 exceeds 700 at " + describe_mode(wv));
        }
        const double factor = std::exp(sign * w.tau * l1);
        for (int c = 0; c < f.components(); ++c) out.at(c, idx) *= factor;
    });
    return out;
}

ModeWeight gevrey_weight(double tau) {
    if (tau == 0.0) return {};
    return [tau](const Wavevector& w) { return std::exp(tau * w.norm_l1()); };
}

double default_c0(const PhysParams& p, AlphaBranch branch) {
    const double alpha = make_alpha(p, branch).value;
    return std::min({p.mu_bar(), p.nu_bar() - alpha, alpha}) / 4.0;
}

double kernel_f_norm(double s, double t, int dim) {
    if (!(s >= 0.0) || t < s) throw DomainError("kernel_f_norm: requires 0 <= s <= t");
    const double h = std::sqrt(t - s) + std::sqrt(s) - std::sqrt(t);
    if (h <= 1e-15 * std::max(1.0, std::sqrt(t))) return 1.0;
    // Periodized Poisson kernel with spacing h/8; the symbol is below e^{-8 pi}
    // at the Nyquist frequency.
    constexpr int points = 1 << 20;
    const double period = points * h / 8.0;
    const GridSpec grid{1, points, period};
    SpectralField k(grid, 1);
    for_each_mode(grid, [&](std::size_t idx, const Wavevector& w) {
        k.at(0, idx) = std::exp(-h * std::abs(w.xi[0])) / period;
    });
    const double one_d = lebesgue_norm(k, 1.0);
    return std::pow(one_d, dim);
}

double multiplier32_bound(double a, const GridSpec& grid) {
    if (!(a >= 0.0)) throw DomainError("multiplier32_bound: a must be >= 0");
    double best = 0.0;
    const double ra = std::sqrt(a);
    for_each_mode(grid, [&](std::size_t, const Wavevector& w) {
        best = std::max(best, -0.5 * a * w.norm_sq() + ra * w.norm_l1());
    });
    return std::exp(best);
}

SpectralField bilinear_gevrey(const SpectralField& f, const SpectralField& g, double t, double c0) {
    if (!(t >= 0.0) || !(c0 >= 0.0)) throw DomainError("bilinear_gevrey: t and c0 must be >= 0");
    const double tau = std::sqrt(c0 * t);
    const SpectralField fs = gevrey_apply(f, {tau, GevreyDirection::smooth});
    const SpectralField gs = gevrey_apply(g, {tau, GevreyDirection::smooth});
    return gevrey_apply(grid_product(fs, gs, true), {tau, GevreyDirection::amplify});
}

double bilinear_holder_ratio(const SpectralField& f, const SpectralField& g, double t, double c0) {
    const double den = lebesgue_norm(f, 4.0) * lebesgue_norm(g, 4.0);
    if (den == 0.0) return 0.0;
    return bilinear_gevrey(f, g, t, c0).plancherel_norm() / den;
}

SpectralField heat_solution(const SpectralField& v0, const HeatForcing& f, double mu, double t) {
    SpectralField out(v0.grid(), v0.components());
    const bool forced = f.profile.components() > 0;
    for_each_mode(v0.grid(), [&](std::size_t idx, const Wavevector& w) {
        const double rate = mu * w.norm_sq();
        const double free = std::exp(-rate * t);
        // int_0^t e^{-rate (t - s)} e^{-beta s} ds
        const double delta = rate - f.beta;
        const double duhamel = delta == 0.0 ? t * std::exp(-f.beta * t)
                                            : std::exp(-f.beta * t) * (-std::expm1(-delta * t)) / delta;
        for (int c = 0; c < v0.components(); ++c) {
            Complex v = free * v0.at(c, idx);
            if (forced) v += duhamel * f.profile.at(c, idx);
            out.at(c, idx) = v;
        }
    });
    return out;
}

double heat_gevrey_maxreg_check(const SpectralField& v0, const HeatForcing& f, double mu, const MaxRegSetup& setup) {
    if (!(mu > 0.0)) throw DomainError("heat_gevrey_maxreg_check: mu must be positive");
    if (setup.times.size() < 2) throw ConfigurationError("heat_gevrey_maxreg_check: need at least two time nodes");
    const bool forced = f.profile.components() > 0 && !f.profile.is_zero();
    if (v0.is_zero() && !forced) return 0.0;

    const auto part = DyadicPartition::for_grid(v0.grid());
    auto inv = [](double x) { return std::isinf(x) ? 0.0 : 1.0 / x; };

    std::vector<SpectralField> v_samples, f_samples;
    for (double t : setup.times) {
        v_samples.push_back(heat_solution(v0, f, mu, t));
        if (forced) f_samples.push_back(std::exp(-f.beta * t) * f.profile);
    }
    auto weight_at = [&](double t) { return gevrey_weight(std::sqrt(setup.c0 * t)); };

    CheminLernerSpec lhs_spec;
    lhs_spec.rho_high = setup.rho1;
    lhs_spec.space.high = {setup.sigma + 2.0 * inv(setup.rho1), setup.p, setup.r};
    lhs_spec.space.j0 = part.j_min;
    lhs_spec.time_samples = setup.times;
    const double lhs = std::pow(mu, inv(setup.rho1)) * chemin_lerner_norm(v_samples, lhs_spec, weight_at).value;

    double rhs = besov_norm(v0, {setup.sigma, setup.p, setup.r});
    if (forced) {
        CheminLernerSpec rhs_spec = lhs_spec;
        rhs_spec.rho_high = setup.rho2;
        rhs_spec.space.high = {setup.sigma - 2.0 + 2.0 * inv(setup.rho2), setup.p, setup.r};
        rhs += std::pow(mu, inv(setup.rho2) - 1.0) * chemin_lerner_norm(f_samples, rhs_spec, weight_at).value;
    }
    return rhs == 0.0 ? 0.0 : lhs / rhs;
}

double lemma51_constant(int dim) { return std::min(1.0 / std::sqrt(static_cast<double>(dim)), 0.75); }

double lemma51_check(const SpectralField& u, int j, double zeta, double alpha, double p) {
    if (!(alpha > 0.0)) throw DomainError("lemma51_check: alpha must be positive");
    const SpectralField block = dyadic_block(u, j);
    if (block.is_zero()) return 0.0;
    const SpectralField lhs_field =
        apply_symbol(gevrey_apply(block, {alpha, GevreyDirection::smooth}), symbols::lambda_power(zeta));
    const double lambda = std::exp2(j);
    const double c = lemma51_constant(u.grid().dim);
    const double lhs = p == 2.0 ? lhs_field.plancherel_norm() : lebesgue_norm(lhs_field, p);
    const double base = p == 2.0 ? block.plancherel_norm() : lebesgue_norm(block, p);
    // evaluate the exponential in log form so large alpha 2^j does not underflow
    return std::exp(std::log(lhs) - std::log(base) - zeta * std::log(lambda) + c * alpha * lambda);
}

double lemma52_high_constant(const Lemma52Setup& setup, int dim) {
    const double c = setup.c > 0.0 ? setup.c : lemma51_constant(dim);
    return 0.5 * c * std::sqrt(setup.c0) * std::exp2(setup.j0);
}

double lemma52_check(const SpectralField& u, double zeta, double t, Band band, const Lemma52Setup& setup) {
    if (!(zeta > 0.0)) throw DomainError("lemma52_check: zeta must be positive");
    if (!(t > 0.0)) throw DomainError("lemma52_check: t must be positive");
    if (u.is_zero()) return 0.0;
    const SpectralField du = apply_symbol(u, symbols::lambda_power(zeta));
    const double num = besov_norm(du, {setup.sigma, setup.q, 1.0}, band, setup.j0);
    const double den = besov_norm(u, {setup.sigma, setup.q, infinity}, band, setup.j0,
                                  gevrey_weight(std::sqrt(setup.c0 * t)));
    if (den == 0.0) return 0.0;
    double ratio = std::pow(t, 0.5 * zeta) * num / den;
    if (band == Band::high) ratio *= std::exp(lemma52_high_constant(setup, u.grid().dim) * std::sqrt(t));
    return ratio;
}

double ProductSetup::s(int dim) const {
    const double d = dim;
    return variant == ProductVariant::m1 ? s1 + s2 - 2.0 * d / p + d / q : s1 + s2 - d / p;
}

void ProductSetup::validate(int dim) const {
    const double d = dim;
    std::ostringstream why;
    if (!(p > 1.0 && std::isfinite(p)) || !(q > 1.0 && std::isfinite(q))) why << "1 < p, q < inf; ";
    if (variant == ProductVariant::m1) {
        if (p > 2.0 * q) why << "p <= 2q; ";
        if (s1 + s2 < d * std::max(0.0, 2.0 / p - 1.0)) why << "s1 + s2 >= d max(0, 2/p - 1); ";
        const double top = d * std::min(1.0 / p, 2.0 / p - 1.0 / q);
        if (s1 > top) why << "s1 <= d min(1/p, 2/p - 1/q); ";
        if (!(s2 < top)) why << "s2 < d min(1/p, 2/p - 1/q); ";
    } else {
        if (p > 2.0 * q) why << "p <= 2q; ";
        if (s1 + s2 < d * std::max(0.0, 1.0 / p + 1.0 / q - 1.0)) why << "s1 + s2 >= d max(0, 1/p + 1/q - 1); ";
        if (s1 > d / p) why << "s1 <= d/p; ";
        if (!(s2 < d * std::min(1.0 / p, 1.0 / q))) why << "s2 < d min(1/p, 1/q); ";
    }
    if (!why.str().empty()) throw ConfigurationError("product estimate: violated " + why.str());
}

double product_estimate_ratio(const SpectralField& a, const SpectralField& b, const ProductSetup& setup) {
    const int d = a.grid().dim;
    setup.validate(d);
    if (a.is_zero() || b.is_zero()) return 0.0;
    const double tau = std::sqrt(setup.c0 * setup.t);
    const SpectralField A = gevrey_apply(a, {tau, GevreyDirection::amplify});
    const SpectralField B = gevrey_apply(b, {tau, GevreyDirection::amplify});
    const SpectralField prod = bilinear_gevrey(A, B, setup.t, setup.c0);
    const double num = besov_norm(prod, {setup.s(d), setup.q, infinity});
    const double pb = setup.variant == ProductVariant::m1 ? setup.p : setup.q;
    const double den = besov_norm(A, {setup.s1, setup.p, 1.0}) * besov_norm(B, {setup.s2, pb, infinity});
    return den == 0.0 ? 0.0 : num / den;
}

double composition_gevrey_check(const SpectralField& z, const std::function<double(double)>& F,
                                const CompositionSetup& setup) {
    const GridSpec& g = z.grid();
    const double tau = std::sqrt(setup.c0 * setup.t);
    const SpectralField Z = gevrey_apply(z, {tau, GevreyDirection::amplify});
    const double size = besov_norm(Z, {g.dim / setup.spec.p, setup.spec.p, 1.0});
    if (size > setup.smallness) {
        std::ostringstream msg;
        msg << "composition_gevrey_check: ||e^{tau L1} z||_{B^{d/p}_{p,1}} = " << size << " exceeds " << setup.smallness;
        throw PreconditionError(msg.str());
    }
    const double den = besov_norm(Z, setup.spec);
    if (den == 0.0) return 0.0;
    RealField x = transform_inverse(z);
    for (double& v : x.values()) v = F(v);
    SpectralField fz = transform_forward(x);
    apply_dealias(fz);
    remove_mean(fz);
    const double num = besov_norm(gevrey_apply(fz, {tau, GevreyDirection::amplify}), setup.spec);
    return num / den;
}

void RatioStats::add(double v) {
    if (count == 0 || v > max) {
        max = v;
        argmax = count;
    }
    min = std::min(min, v);
    ++count;
}

}  // namespace nsk
