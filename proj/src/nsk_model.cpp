#include "nsk/nsk_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsk/error.hpp"

namespace nsk {

// ---------------------------------------------------------------------------
// Closures and parameters

double Closure::value(double delta) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * delta + *it;
    return acc;
}

double Closure::increment(double delta) const {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * delta + coeffs[k];
    return acc * delta;
}

double Closure::derivative(double delta) const {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * delta + static_cast<double>(k) * coeffs[k];
    return acc;
}

double Closure::derivative_increment(double delta) const {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 2;) acc = acc * delta + static_cast<double>(k) * coeffs[k];
    return acc * delta;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::parabolic: return "parabolic";
        case Regime::degenerate: return "degenerate";
        case Regime::oscillatory: return "oscillatory";
    }
    return "unknown";
}

PhysParams PhysParams::from_scaled(double mu_bar, double lambda_bar, double kappa_bar, double rho_star) {
    PhysParams p;
    p.rho_star = rho_star;
    p.mu.coeffs = {mu_bar * rho_star};
    p.lambda.coeffs = {lambda_bar * rho_star};
    p.kappa.coeffs = {kappa_bar / rho_star};
    return p;
}

Regime PhysParams::regime() const {
    const double disc = discriminant();
    const double scale = nu_bar() * nu_bar();
    if (std::abs(disc) <= 1e-14 * scale) return Regime::degenerate;
    return disc > 0.0 ? Regime::parabolic : Regime::oscillatory;
}

std::vector<std::string> PhysParams::validate() const {
    std::ostringstream why;
    if (!(rho_star > 0.0)) why << "rho_star must be positive; ";
    if (!(mu_bar() > 0.0)) why << "mu_bar must be positive (got " << mu_bar() << "); ";
    if (!(nu_bar() > 0.0)) why << "nu_bar = lambda_bar + 2 mu_bar must be positive (got " << nu_bar() << "); ";
    if (!(kappa_bar() > 0.0)) why << "kappa_bar must be positive (got " << kappa_bar() << "); ";
    if (std::abs(pressure.slope_at_reference()) > 1e-12)
        why << "pressure closure must satisfy P'(rho*) = 0 (got " << pressure.slope_at_reference() << "); ";
    if (!why.str().empty()) throw ConfigurationError("PhysParams: " + why.str());
    std::vector<std::string> warnings;
    if (lambda_bar() <= 0.0) warnings.push_back("lambda_bar <= 0: only nu_bar > 0 is required downstream");
    return warnings;
}

Alpha make_alpha(const PhysParams& p, AlphaBranch branch) {
    const double disc = p.discriminant();
    if (disc < 0.0 && p.regime() == Regime::oscillatory) {
        std::ostringstream msg;
        msg << "alpha is complex: nu_bar^2 - 4 kappa_bar = " << disc << " < 0";
        throw RegimeError(msg.str());
    }
    const double root = std::sqrt(std::max(disc, 0.0));
    const double nu = p.nu_bar();
    // The larger root is computed directly and the smaller from alpha_+ alpha_- = kappa.
    const double big = 0.5 * (nu + root);
    const double small = p.kappa_bar() / big;
    return {branch == AlphaBranch::plus ? big : small, branch};
}

// ---------------------------------------------------------------------------
// State

State State::zero(const GridSpec& grid) { return {SpectralField(grid, 1), SpectralField(grid, grid.dim)}; }

void State::validate() const {
    if (a.components() != 1 || m.components() != a.grid().dim || m.grid() != a.grid())
        throw ConfigurationError("State: a must be scalar and m a d-vector on the same grid");
    if (!a.is_real() || !m.is_real()) throw StateError("State: fields must be real-valued");
    if (a.at(0, 0) != Complex{}) throw StateError("State: density fluctuation must have zero mean");
}

State& State::operator+=(const State& o) {
    a += o.a;
    m += o.m;
    return *this;
}

State& State::operator*=(double s) {
    a *= s;
    m *= s;
    return *this;
}

// ---------------------------------------------------------------------------
// Linear operator

State linear_rhs(const State& s, const PhysParams& p) {
    const GridSpec& g = s.grid();
    const int d = g.dim;
    const double mu = p.mu_bar();
    const double ml = p.mu_bar() + p.lambda_bar();
    const double kap = p.kappa_bar();
    State out = State::zero(g);
    for_each_mode(g, [&](std::size_t idx, const Wavevector& w) {
        const double k2 = w.norm_sq();
        Complex dot{};
        for (int i = 0; i < d; ++i) dot += w.xi_odd[static_cast<std::size_t>(i)] * s.m.at(i, idx);
        const Complex ahat = s.a.at(0, idx);
        out.a.at(0, idx) = -Complex(0.0, 1.0) * dot;
        for (int i = 0; i < d; ++i) {
            const double xi = w.xi_odd[static_cast<std::size_t>(i)];
            out.m.at(i, idx) = -mu * k2 * s.m.at(i, idx) - ml * xi * dot - Complex(0.0, kap * k2 * xi) * ahat;
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Nonlinear terms

double min_density_ratio(const State& s) {
    const RealField a = transform_inverse(s.a);
    double lo = infinity;
    for (double v : a.values()) lo = std::min(lo, 1.0 + v);
    return lo;
}

namespace {

using Grid = std::vector<double>;

int pair_count(int d) { return d * (d + 1) / 2; }

int pair_index(int d, int i, int j) {
    if (i > j) std::swap(i, j);
    if (i == j) return i;
    // off-diagonal pairs follow the diagonal: (0,1), (0,2), (1,2)
    int k = d;
    for (int r = 0; r < d; ++r)
        for (int c = r + 1; c < d; ++c, ++k)
            if (r == i && c == j) return k;
    return -1;
}

Grid to_grid(const SpectralField& f, int c) {
    SpectralField comp = f.extract(c);
    return transform_inverse(comp).values();
}

SpectralField to_spectral(const GridSpec& g, Grid v) {
    return transform_forward(RealField(g, 1, std::move(v)));
}

/// Pointwise fields shared by all terms.
struct GridQuantities {
    int d = 0;
    std::size_t n = 0;
    Grid a, lap_a;
    std::array<Grid, 3> m, grad_a;
    std::array<std::array<Grid, 3>, 3> grad_u;  ///< grad_u[i][j] = d_j u_i, u = m / (1 + a)
    Grid q;                                     ///< a / (1 + a)
};

GridQuantities gather(const State& s, bool need_u) {
    const GridSpec& g = s.grid();
    GridQuantities gq;
    gq.d = g.dim;
    gq.n = g.size();
    gq.a = to_grid(s.a, 0);
    for (double v : gq.a)
        if (!(1.0 + v > 0.0)) throw StateError("nonlinear_g: vacuum, 1 + a <= 0 on the grid");
    gq.lap_a = to_grid(laplacian(s.a), 0);
    const SpectralField ga = gradient(s.a);
    for (int i = 0; i < gq.d; ++i) {
        gq.m[static_cast<std::size_t>(i)] = to_grid(s.m, i);
        gq.grad_a[static_cast<std::size_t>(i)] = to_grid(ga, i);
    }
    gq.q.resize(gq.n);
    for (std::size_t x = 0; x < gq.n; ++x) gq.q[x] = gq.a[x] / (1.0 + gq.a[x]);
    if (need_u) {
        for (int i = 0; i < gq.d; ++i) {
            Grid u(gq.n);
            const auto& mi = gq.m[static_cast<std::size_t>(i)];
            for (std::size_t x = 0; x < gq.n; ++x) u[x] = mi[x] / (1.0 + gq.a[x]);
            const SpectralField uh = to_spectral(g, std::move(u));
            for (int j = 0; j < gq.d; ++j)
                gq.grad_u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    to_grid(apply_symbol(uh, symbols::derivative(j)), 0);
        }
    }
    return gq;
}

/// g = div T + grad S - A V on the spectral side.
struct Pieces {
    std::vector<Grid> T;
    Grid S;
    std::array<Grid, 3> V;
    bool has_T = false, has_S = false, has_V = false;

    explicit Pieces(const GridQuantities& gq) : T(static_cast<std::size_t>(pair_count(gq.d))) {}

    Grid& t(const GridQuantities& gq, int i, int j) {
        has_T = true;
        Grid& v = T[static_cast<std::size_t>(pair_index(gq.d, i, j))];
        if (v.empty()) v.assign(gq.n, 0.0);
        return v;
    }
    Grid& s(const GridQuantities& gq) {
        has_S = true;
        if (S.empty()) S.assign(gq.n, 0.0);
        return S;
    }
    Grid& v(const GridQuantities& gq, int i) {
        has_V = true;
        Grid& x = V[static_cast<std::size_t>(i)];
        if (x.empty()) x.assign(gq.n, 0.0);
        return x;
    }
};

void add_term(int term, const GridQuantities& gq, const PhysParams& p, Pieces& out) {
    const int d = gq.d;
    const std::size_t n = gq.n;
    const double rs = p.rho_star;
    auto di = [](int i) { return static_cast<std::size_t>(i); };
    switch (term) {
        case 1:  // div((Q - 1) m (x) m)
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j) {
                    Grid& t = out.t(gq, i, j);
                    for (std::size_t x = 0; x < n; ++x)
                        t[x] += (gq.q[x] - 1.0) * gq.m[di(i)][x] * gq.m[di(j)][x];
                }
            break;
        case 2:  // -(mu Lap + (mu + lambda) grad div)(Q m)
            for (int i = 0; i < d; ++i) {
                Grid& v = out.v(gq, i);
                for (std::size_t x = 0; x < n; ++x) v[x] += gq.q[x] * gq.m[di(i)][x];
            }
            break;
        case 3: {  // 2 div(mu~ D(u)) + grad(lambda~ div u)
            for (std::size_t x = 0; x < n; ++x) {
                const double delta = rs * gq.a[x];
                const double mut = p.mu.increment(delta) / rs;
                const double lat = p.lambda.increment(delta) / rs;
                double div = 0.0;
                for (int i = 0; i < d; ++i) div += gq.grad_u[di(i)][di(i)][x];
                out.s(gq)[x] += lat * div;
                for (int i = 0; i < d; ++i)
                    for (int j = i; j < d; ++j)
                        out.t(gq, i, j)[x] += mut * (gq.grad_u[di(i)][di(j)][x] + gq.grad_u[di(j)][di(i)][x]);
            }
            break;
        }
        case 4: {  // -grad(a L(a)), a L(a) = (P(rho) - P(rho*)) / rho*
            Grid& s = out.s(gq);
            for (std::size_t x = 0; x < n; ++x) s[x] -= p.pressure.increment(rs * gq.a[x]) / rs;
            break;
        }
        case 5: {  // grad(kappa~_1 Lap a)
            Grid& s = out.s(gq);
            for (std::size_t x = 0; x < n; ++x) {
                const double delta = rs * gq.a[x];
                const double k1 = rs * (p.kappa.increment(delta) + gq.a[x] * p.kappa.value(delta));
                s[x] += k1 * gq.lap_a[x];
            }
            break;
        }
        case 6: {  // (rho*/2) grad((kappa~_2 + kappa_check)|grad a|^2) - div((kappa~_3 + kappa)grad a (x) grad a)
            const double kc = p.kappa_check();
            const double kb = p.kappa_bar();
            for (std::size_t x = 0; x < n; ++x) {
                const double delta = rs * gq.a[x];
                const double k2 = p.kappa.increment(delta) + delta * p.kappa.derivative(delta) +
                                  rs * p.kappa.derivative_increment(delta);
                const double k3 = rs * p.kappa.increment(delta);
                double g2 = 0.0;
                for (int i = 0; i < d; ++i) g2 += gq.grad_a[di(i)][x] * gq.grad_a[di(i)][x];
                out.s(gq)[x] += 0.5 * rs * (k2 + kc) * g2;
                for (int i = 0; i < d; ++i)
                    for (int j = i; j < d; ++j)
                        out.t(gq, i, j)[x] -= (k3 + kb) * gq.grad_a[di(i)][x] * gq.grad_a[di(j)][x];
            }
            break;
        }
        default: throw ConfigurationError("nonlinear term index out of range");
    }
}

SpectralField assemble(const GridSpec& g, Pieces& pc, const PhysParams& p, bool dealias) {
    const int d = g.dim;
    SpectralField out(g, d);
    std::vector<SpectralField> T;
    if (pc.has_T)
        for (auto& v : pc.T) T.push_back(v.empty() ? SpectralField(g, 1) : to_spectral(g, std::move(v)));
    SpectralField S = pc.has_S ? to_spectral(g, std::move(pc.S)) : SpectralField(g, 1);
    std::vector<SpectralField> V;
    if (pc.has_V)
        for (int i = 0; i < d; ++i) V.push_back(to_spectral(g, std::move(pc.V[static_cast<std::size_t>(i)])));
    const double mu = p.mu_bar();
    const double ml = p.mu_bar() + p.lambda_bar();
    const Complex I(0.0, 1.0);
    for_each_mode(g, [&](std::size_t idx, const Wavevector& w) {
        const double k2 = w.norm_sq();
        Complex dotv{};
        if (pc.has_V)
            for (int j = 0; j < d; ++j) dotv += w.xi_odd[static_cast<std::size_t>(j)] * V[static_cast<std::size_t>(j)].at(0, idx);
        for (int i = 0; i < d; ++i) {
            const double xi = w.xi_odd[static_cast<std::size_t>(i)];
            Complex acc{};
            if (pc.has_T)
                for (int j = 0; j < d; ++j)
                    acc += I * w.xi_odd[static_cast<std::size_t>(j)] *
                           T[static_cast<std::size_t>(pair_index(d, i, j))].at(0, idx);
            if (pc.has_S) acc += I * xi * S.at(0, idx);
            if (pc.has_V) acc += mu * k2 * V[static_cast<std::size_t>(i)].at(0, idx) + ml * xi * dotv;
            out.at(i, idx) = acc;
        }
    });
    if (dealias) apply_dealias(out);
    return out;
}

}  // namespace

NonlinearTerms nonlinear_terms(const State& s, const PhysParams& p, bool dealias) {
    s.validate();
    const GridQuantities gq = gather(s, true);
    NonlinearTerms out;
    for (int term = 1; term <= 6; ++term) {
        Pieces pc(gq);
        add_term(term, gq, p, pc);
        out[static_cast<std::size_t>(term - 1)] = assemble(s.grid(), pc, p, dealias);
    }
    return out;
}

SpectralField nonlinear_g(const State& s, const PhysParams& p, bool dealias) {
    s.validate();
    const bool viscous = p.mu.coeffs.size() > 1 || p.lambda.coeffs.size() > 1;
    const GridQuantities gq = gather(s, viscous);
    Pieces pc(gq);
    for (int term = 1; term <= 6; ++term) {
        if (term == 3 && !viscous) continue;
        add_term(term, gq, p, pc);
    }
    return assemble(s.grid(), pc, p, dealias);
}

// ---------------------------------------------------------------------------
// Effective velocity and spectrum

SpectralField effective_velocity(const State& s, const Alpha& alpha) {
    SpectralField w = leray_project(s.m).compressible;
    w += alpha.value * gradient(s.a);
    return w;
}

SpectralField effective_velocity(const State& s, const PhysParams& p, AlphaBranch branch) {
    return effective_velocity(s, make_alpha(p, branch));
}

SpectralEigenvalues spectral_eigenvalues(double xi_sq, const PhysParams& p, int dim) {
    const double nu = p.nu_bar();
    const Complex root = std::sqrt(Complex(p.discriminant(), 0.0));
    // r^2 + nu r + kappa = 0; the root of larger modulus first, the other from the product.
    const Complex big = -0.5 * (nu + root);
    const Complex small = big == Complex{} ? Complex{} : p.kappa_bar() / big;
    SpectralEigenvalues ev;
    ev.plus = big * xi_sq;
    ev.minus = small * xi_sq;
    ev.incompressible = -p.mu_bar() * xi_sq;
    ev.incompressible_multiplicity = dim - 1;
    ev.regime = p.regime();
    return ev;
}

std::array<double, 4> expm2(const std::array<double, 4>& m, double t) {
    const double s = 0.5 * (m[0] + m[3]);
    const double h = 0.5 * (m[0] - m[3]);
    const double disc = h * h + m[1] * m[2];
    double c = 0.0;   // e^{st} cosh(sqrt(disc) t)
    double sn = 0.0;  // e^{st} sinh(sqrt(disc) t) / sqrt(disc)
    if (t == 0.0) {
        c = 1.0;
    } else if (disc > 0.0) {
        const double delta = std::sqrt(disc);
        const double lead = std::exp((s + delta) * t);
        const double decay = std::exp(-2.0 * delta * t);
        c = lead * 0.5 * (1.0 + decay);
        sn = lead * (-std::expm1(-2.0 * delta * t)) / (2.0 * delta);
    } else if (disc < 0.0) {
        const double omega = std::sqrt(-disc);
        const double lead = std::exp(s * t);
        c = lead * std::cos(omega * t);
        sn = lead * std::sin(omega * t) / omega;
    } else {
        const double lead = std::exp(s * t);
        c = lead;
        sn = lead * t;
    }
    return {c + sn * (m[0] - s), sn * m[1], sn * m[2], c + sn * (m[3] - s)};
}

LinearPropagator linear_propagator(const Wavevector& w, double t, const PhysParams& p) {
    if (t < 0.0) throw DomainError("linear_propagator: t must be >= 0");
    const double k2 = w.norm_sq();
    const double q2 = w.odd_norm_sq();
    LinearPropagator out;
    out.solenoidal = std::exp(-p.mu_bar() * k2 * t);
    const std::array<double, 4> m{0.0, -1.0, p.kappa_bar() * q2 * k2,
                                  -(p.mu_bar() * k2 + (p.mu_bar() + p.lambda_bar()) * q2)};
    out.e = expm2(m, t);
    return out;
}

State propagate_linear(const State& s, double t, const PhysParams& p) {
    const GridSpec& g = s.grid();
    const int d = g.dim;
    State out = State::zero(g);
    const Complex I(0.0, 1.0);
    for_each_mode(g, [&](std::size_t idx, const Wavevector& w) {
        const LinearPropagator lp = linear_propagator(w, t, p);
        const double q2 = w.odd_norm_sq();
        Complex dot{};
        for (int i = 0; i < d; ++i) dot += w.xi_odd[static_cast<std::size_t>(i)] * s.m.at(i, idx);
        const Complex a0 = s.a.at(0, idx);
        const Complex y0 = I * dot;
        const Complex a1 = lp.e[0] * a0 + lp.e[1] * y0;
        const Complex y1 = lp.e[2] * a0 + lp.e[3] * y0;
        out.a.at(0, idx) = a1;
        for (int i = 0; i < d; ++i) {
            const double xi = w.xi_odd[static_cast<std::size_t>(i)];
            const Complex qm0 = q2 > 0.0 ? xi * dot / q2 : Complex{};
            const Complex qm1 = q2 > 0.0 ? -I * xi * y1 / q2 : Complex{};
            out.m.at(i, idx) = lp.solenoidal * (s.m.at(i, idx) - qm0) + qm1;
        }
    });
    if (!s.a.is_real()) out.a.mark_complex();
    if (!s.m.is_real()) out.m.mark_complex();
    return out;
}

}  // namespace nsk
