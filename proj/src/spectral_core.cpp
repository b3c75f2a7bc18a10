#include "nsk/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsk/error.hpp"
#include "nsk/fft.hpp"

namespace nsk {

// ---------------------------------------------------------------------------
// GridSpec

void GridSpec::validate() const {
    std::ostringstream why;
    if (dim < 1 || dim > 3) why << "dim must be in [1,3], got " << dim << "; ";
    if (points < 8 || (points & (points - 1)) != 0)
        why << "points_per_axis must be a power of two >= 8, got " << points << "; ";
    if (!(length > 0.0) || !std::isfinite(length))
        why << "box_length must be positive, got " << length << "; ";
    if (!why.str().empty()) throw ConfigurationError("GridSpec: " + why.str());
}

std::size_t GridSpec::size() const {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(points);
    return n;
}

double GridSpec::cell_volume() const { return std::pow(spacing(), dim); }

double GridSpec::volume() const { return std::pow(length, dim); }

int GridSpec::dealias_cutoff() const { return (points + 2) / 3 - 1; }

double Wavevector::norm() const { return std::sqrt(norm_sq()); }

double Wavevector::norm_l1() const { return std::abs(xi[0]) + std::abs(xi[1]) + std::abs(xi[2]); }

std::size_t conjugate_index(const GridSpec& grid, std::size_t idx) {
    const auto n = static_cast<std::size_t>(grid.points);
    std::size_t out = 0;
    std::size_t stride = 1;
    for (int axis = 0; axis < grid.dim; ++axis) {
        const std::size_t i = idx % n;
        idx /= n;
        out += ((n - i) % n) * stride;
        stride *= n;
    }
    return out;
}

// ---------------------------------------------------------------------------
// RealField

RealField::RealField(GridSpec grid, int components)
    : grid_(grid), components_(components),
      values_(grid.size() * static_cast<std::size_t>(components), 0.0) {
    grid_.validate();
    if (components < 1) throw ConfigurationError("RealField: components must be >= 1");
}

RealField::RealField(GridSpec grid, int components, std::vector<double> values)
    : grid_(grid), components_(components), values_(std::move(values)) {
    grid_.validate();
    if (components < 1) throw ConfigurationError("RealField: components must be >= 1");
    if (values_.size() != grid_.size() * static_cast<std::size_t>(components)) {
        std::ostringstream msg;
        msg << "RealField: got " << values_.size() << " values, grid expects "
            << grid_.size() * static_cast<std::size_t>(components);
        throw ConfigurationError(msg.str());
    }
}

std::span<double> RealField::component(int c) {
    return {values_.data() + static_cast<std::size_t>(c) * grid_.size(), grid_.size()};
}

std::span<const double> RealField::component(int c) const {
    return {values_.data() + static_cast<std::size_t>(c) * grid_.size(), grid_.size()};
}

double RealField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double RealField::coordinate(std::size_t idx, int axis) const {
    const auto n = static_cast<std::size_t>(grid_.points);
    // axis 0 is the slowest index
    for (int a = grid_.dim - 1; a > axis; --a) idx /= n;
    return static_cast<double>(idx % n) * grid_.spacing();
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(GridSpec grid, int components)
    : grid_(grid), components_(components),
      coeffs_(grid.size() * static_cast<std::size_t>(components)) {
    grid_.validate();
    if (components < 1) throw ConfigurationError("SpectralField: components must be >= 1");
}

std::span<Complex> SpectralField::component(int c) {
    return {coeffs_.data() + static_cast<std::size_t>(c) * modes(), modes()};
}

std::span<const Complex> SpectralField::component(int c) const {
    return {coeffs_.data() + static_cast<std::size_t>(c) * modes(), modes()};
}

SpectralField SpectralField::extract(int c) const {
    SpectralField out(grid_, 1);
    auto src = component(c);
    std::copy(src.begin(), src.end(), out.coeffs_.begin());
    out.real_ = real_;
    return out;
}

void SpectralField::assign(int c, const SpectralField& scalar) {
    if (scalar.grid() != grid_ || scalar.components() != 1)
        throw ConfigurationError("SpectralField::assign: expected a scalar on the same grid");
    auto dst = component(c);
    std::copy(scalar.coeffs_.begin(), scalar.coeffs_.end(), dst.begin());
    real_ = real_ && scalar.real_;
}

double SpectralField::hermitian_defect() const {
    double defect = 0.0;
    for (int c = 0; c < components_; ++c) {
        auto v = component(c);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::size_t j = conjugate_index(grid_, i);
            defect = std::max(defect, std::abs(v[i] - std::conj(v[j])));
        }
    }
    return defect;
}

double SpectralField::max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

double SpectralField::plancherel_norm() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return std::sqrt(s * grid_.volume());
}

bool SpectralField::is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Complex& c) { return c == Complex{}; });
}

void SpectralField::check_compatible(const SpectralField& other) const {
    if (other.grid_ != grid_ || other.components_ != components_)
        throw ConfigurationError("SpectralField: incompatible operands");
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    real_ = real_ && other.real_;
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
    real_ = real_ && other.real_;
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

// ---------------------------------------------------------------------------
// Transforms

SpectralField transform_forward(const RealField& field) {
    SpectralField out(field.grid(), field.components());
    const double norm = 1.0 / static_cast<double>(field.grid().size());
    for (int c = 0; c < field.components(); ++c) {
        auto src = field.component(c);
        auto dst = out.component(c);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = Complex(src[i], 0.0);
        detail::fft_forward(field.grid(), dst);
        for (auto& v : dst) v *= norm;
    }
    return out;
}

RealField transform_inverse(const SpectralField& field) {
    if (!field.is_real())
        throw DomainError("transform_inverse: field is flagged complex-valued");
    RealField out(field.grid(), field.components());
    std::vector<Complex> buffer(field.modes());
    for (int c = 0; c < field.components(); ++c) {
        auto src = field.component(c);
        std::copy(src.begin(), src.end(), buffer.begin());
        detail::fft_backward(field.grid(), buffer);
        auto dst = out.component(c);
        for (std::size_t i = 0; i < buffer.size(); ++i) dst[i] = buffer[i].real();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Symbols

namespace symbols {

Symbol identity() {
    return {"identity", [](const Wavevector&) { return Complex(1.0, 0.0); }};
}

Symbol abs_sq() {
    return {"|xi|^2", [](const Wavevector& w) { return Complex(w.norm_sq(), 0.0); }};
}

Symbol laplacian() {
    return {"laplacian", [](const Wavevector& w) { return Complex(-w.norm_sq(), 0.0); }};
}

Symbol lambda_power(double s) {
    return {"|xi|^" + std::to_string(s), [s](const Wavevector& w) {
                if (w.is_zero()) return Complex{};
                return Complex(std::pow(w.norm(), s), 0.0);
            }};
}

Symbol lambda1() {
    return {"|xi|_1", [](const Wavevector& w) { return Complex(w.norm_l1(), 0.0); }};
}

Symbol derivative(int axis) {
    return {"d/dx" + std::to_string(axis),
            [axis](const Wavevector& w) { return Complex(0.0, w.xi_odd[static_cast<std::size_t>(axis)]); }};
}

Symbol gevrey(double tau) {
    return {"exp(tau|xi|_1)", [tau](const Wavevector& w) { return Complex(std::exp(tau * w.norm_l1()), 0.0); }};
}

Symbol product(Symbol a, Symbol b) {
    auto ea = a.eval;
    auto eb = b.eval;
    return {a.name + "*" + b.name, [ea, eb](const Wavevector& w) { return ea(w) * eb(w); }};
}

}  // namespace symbols

SpectralField apply_symbol(const SpectralField& f, const Symbol& s) {
    SpectralField out = f;
    for_each_mode(f.grid(), [&](std::size_t idx, const Wavevector& w) {
        const Complex factor = s.eval(w);
        for (int c = 0; c < f.components(); ++c) out.at(c, idx) *= factor;
    });
    if (f.is_real()) {
        const double scale = std::max(out.max_abs(), std::numeric_limits<double>::min());
        if (out.hermitian_defect() > 1e-12 * scale) out.mark_complex();
    }
    return out;
}

LeraySplit leray_project(const SpectralField& m) {
    const GridSpec& g = m.grid();
    if (m.components() != g.dim)
        throw ConfigurationError("leray_project: expected a d-component vector field");
    LeraySplit out{m, SpectralField(g, g.dim)};
    const int d = g.dim;
    for_each_mode(g, [&](std::size_t idx, const Wavevector& w) {
        const double q2 = w.odd_norm_sq();
        if (q2 == 0.0) return;  // xi = 0 (and pure Nyquist corners) stay in P m
        Complex dot{};
        for (int i = 0; i < d; ++i) dot += w.xi_odd[static_cast<std::size_t>(i)] * m.at(i, idx);
        for (int i = 0; i < d; ++i) {
            const Complex q = w.xi_odd[static_cast<std::size_t>(i)] * dot / q2;
            out.compressible.at(i, idx) = q;
            out.solenoidal.at(i, idx) = m.at(i, idx) - q;
        }
    });
    if (!m.is_real()) {
        out.solenoidal.mark_complex();
        out.compressible.mark_complex();
    }
    return out;
}

SpectralField gradient(const SpectralField& scalar) {
    const GridSpec& g = scalar.grid();
    if (scalar.components() != 1) throw ConfigurationError("gradient: expected a scalar field");
    SpectralField out(g, g.dim);
    for_each_mode(g, [&](std::size_t idx, const Wavevector& w) {
        const Complex v = scalar.at(0, idx);
        for (int i = 0; i < g.dim; ++i)
            out.at(i, idx) = Complex(0.0, w.xi_odd[static_cast<std::size_t>(i)]) * v;
    });
    if (!scalar.is_real()) out.mark_complex();
    return out;
}

SpectralField divergence(const SpectralField& vector) {
    const GridSpec& g = vector.grid();
    if (vector.components() != g.dim)
        throw ConfigurationError("divergence: expected a d-component vector field");
    SpectralField out(g, 1);
    for_each_mode(g, [&](std::size_t idx, const Wavevector& w) {
        Complex s{};
        for (int i = 0; i < g.dim; ++i)
            s += Complex(0.0, w.xi_odd[static_cast<std::size_t>(i)]) * vector.at(i, idx);
        out.at(0, idx) = s;
    });
    if (!vector.is_real()) out.mark_complex();
    return out;
}

SpectralField laplacian(const SpectralField& f) {
    SpectralField out = f;
    for_each_mode(f.grid(), [&](std::size_t idx, const Wavevector& w) {
        const double s = -w.norm_sq();
        for (int c = 0; c < f.components(); ++c) out.at(c, idx) *= s;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Norms

double lebesgue_norm(const RealField& f, double r) {
    if (!(r >= 1.0)) throw DomainError("lebesgue_norm: r must be >= 1");
    const std::size_t n = f.grid().size();
    const int nc = f.components();
    auto magnitude = [&](std::size_t i) {
        if (nc == 1) return std::abs(f.values()[i]);
        double s = 0.0;
        for (int c = 0; c < nc; ++c) {
            const double v = f.values()[static_cast<std::size_t>(c) * n + i];
            s += v * v;
        }
        return std::sqrt(s);
    };
    if (std::isinf(r)) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, magnitude(i));
        return m;
    }
    // Scale by the max to keep large r from overflowing.
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, magnitude(i));
    if (peak == 0.0) return 0.0;
    double s = 0.0;
    if (r == 2.0) {
        for (std::size_t i = 0; i < n; ++i) {
            const double v = magnitude(i) / peak;
            s += v * v;
        }
        return peak * std::sqrt(s * f.grid().cell_volume());
    }
    for (std::size_t i = 0; i < n; ++i) s += std::pow(magnitude(i) / peak, r);
    return peak * std::pow(s * f.grid().cell_volume(), 1.0 / r);
}

double lebesgue_norm(const SpectralField& f, double r) {
    if (!(r >= 1.0)) throw DomainError("lebesgue_norm: r must be >= 1");
    return lebesgue_norm(transform_inverse(f), r);
}

// ---------------------------------------------------------------------------
// Band limitation

void apply_dealias(SpectralField& f) {
    const int cutoff = f.grid().dealias_cutoff();
    for_each_mode(f.grid(), [&](std::size_t idx, const Wavevector& w) {
        for (int i = 0; i < w.dim; ++i) {
            if (std::abs(w.k[static_cast<std::size_t>(i)]) > cutoff) {
                for (int c = 0; c < f.components(); ++c) f.at(c, idx) = Complex{};
                return;
            }
        }
    });
}

bool is_dealiased(const SpectralField& f) {
    const int cutoff = f.grid().dealias_cutoff();
    bool ok = true;
    for_each_mode(f.grid(), [&](std::size_t idx, const Wavevector& w) {
        for (int i = 0; i < w.dim; ++i) {
            if (std::abs(w.k[static_cast<std::size_t>(i)]) > cutoff) {
                for (int c = 0; c < f.components(); ++c)
                    if (f.at(c, idx) != Complex{}) ok = false;
                return;
            }
        }
    });
    return ok;
}

void remove_mean(SpectralField& f) {
    for (int c = 0; c < f.components(); ++c) f.at(c, 0) = Complex{};
}

SpectralField grid_product(const SpectralField& f, const SpectralField& g, bool dealias) {
    if (f.components() != 1 || g.components() != 1 || f.grid() != g.grid())
        throw ConfigurationError("grid_product: expected two scalars on the same grid");
    RealField a = transform_inverse(f);
    const RealField b = transform_inverse(g);
    for (std::size_t i = 0; i < a.values().size(); ++i) a.values()[i] *= b.values()[i];
    SpectralField out = transform_forward(a);
    if (dealias) apply_dealias(out);
    return out;
}

}  // namespace nsk
