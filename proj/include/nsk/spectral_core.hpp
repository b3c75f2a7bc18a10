#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace nsk {

using Complex = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Periodic box [0, L)^d sampled with N points per axis.
struct GridSpec {
    int dim = 3;
    int points = 32;
    double length = 2.0 * pi;

    /// Throws ConfigurationError unless 1 <= dim <= 3, N >= 8 is a power of two, L > 0.
    void validate() const;

    std::size_t size() const;
    double spacing() const { return length / points; }
    double cell_volume() const;
    double volume() const;
    double fundamental() const { return 2.0 * pi / length; }
    /// Signed lattice index for FFT position i (the Nyquist position maps to -N/2).
    int lattice_index(int i) const { return i < points / 2 ? i : i - points; }
    double nyquist() const { return pi * points / length; }
    /// Index range [-K, K] per axis kept by the 2/3 rule.
    int dealias_cutoff() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Lattice point with its physical wavevector.
///
/// `xi` is the exact wavevector 2*pi*k/L. `xi_odd` zeroes components sitting on
/// the Nyquist index; odd-order symbols (gradients, divergence, the Leray
/// projector) use it so that they stay Hermitian and mutually consistent
/// (div grad == -|xi_odd|^2 exactly).
struct Wavevector {
    int dim = 0;
    std::array<int, 3> k{};
    std::array<double, 3> xi{};
    std::array<double, 3> xi_odd{};
    bool on_nyquist = false;

    double norm_sq() const { return xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]; }
    double norm() const;
    double norm_l1() const;
    double odd_norm_sq() const {
        return xi_odd[0] * xi_odd[0] + xi_odd[1] * xi_odd[1] + xi_odd[2] * xi_odd[2];
    }
    bool is_zero() const { return k[0] == 0 && k[1] == 0 && k[2] == 0; }
};

/// Calls f(flat_index, wavevector) for every mode in FFT (row-major) order.
template <class F>
void for_each_mode(const GridSpec& grid, F&& f) {
    const int n = grid.points;
    const int d = grid.dim;
    const double k0 = grid.fundamental();
    Wavevector w;
    w.dim = d;
    const int n1 = d > 1 ? n : 1;
    const int n2 = d > 2 ? n : 1;
    std::size_t idx = 0;
    auto set_axis = [&](int axis, int i) {
        const int k = grid.lattice_index(i);
        w.k[axis] = k;
        w.xi[axis] = k0 * k;
        w.xi_odd[axis] = (2 * k == -n) ? 0.0 : k0 * k;
    };
    for (int i0 = 0; i0 < n; ++i0) {
        set_axis(0, i0);
        for (int i1 = 0; i1 < n1; ++i1) {
            if (d > 1) set_axis(1, i1);
            for (int i2 = 0; i2 < n2; ++i2) {
                if (d > 2) set_axis(2, i2);
                w.on_nyquist = (2 * w.k[0] == -n) || (d > 1 && 2 * w.k[1] == -n) ||
                               (d > 2 && 2 * w.k[2] == -n);
                f(idx, static_cast<const Wavevector&>(w));
                ++idx;
            }
        }
    }
}

/// Flat index of the lattice point -k.
std::size_t conjugate_index(const GridSpec& grid, std::size_t idx);

/// Real values on the physical grid, component-major.
class RealField {
public:
    RealField(GridSpec grid, int components = 1);
    RealField(GridSpec grid, int components, std::vector<double> values);

    const GridSpec& grid() const { return grid_; }
    int components() const { return components_; }
    std::span<double> component(int c);
    std::span<const double> component(int c) const;
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double max_abs() const;

    /// Physical coordinate of grid point idx along axis.
    double coordinate(std::size_t idx, int axis) const;

private:
    GridSpec grid_;
    int components_;
    std::vector<double> values_;
};

/// Fourier coefficients of a real field, normalized so that
/// f(x) = sum_k c_k exp(i xi_k . x).
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(GridSpec grid, int components = 1);

    const GridSpec& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t modes() const { return grid_.size(); }

    std::span<Complex> component(int c);
    std::span<const Complex> component(int c) const;
    Complex& at(int c, std::size_t idx) { return coeffs_[static_cast<std::size_t>(c) * modes() + idx]; }
    const Complex& at(int c, std::size_t idx) const {
        return coeffs_[static_cast<std::size_t>(c) * modes() + idx];
    }
    std::vector<Complex>& data() { return coeffs_; }
    const std::vector<Complex>& data() const { return coeffs_; }

    /// Scalar field holding component c.
    SpectralField extract(int c) const;
    void assign(int c, const SpectralField& scalar);

    /// False once an operation produced coefficients without Hermitian symmetry.
    bool is_real() const { return real_; }
    void mark_complex() { real_ = false; }
    /// Set by operations asked for something outside their resolvable range.
    bool out_of_range() const { return out_of_range_; }
    void mark_out_of_range() { out_of_range_ = true; }

    /// max_k |c(k) - conj(c(-k))| over all components.
    double hermitian_defect() const;
    double max_abs() const;
    /// Coefficient l2 norm scaled by the box volume: the exact L2 norm of the series.
    double plancherel_norm() const;
    bool is_zero() const;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double s);
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

private:
    void check_compatible(const SpectralField& other) const;

    GridSpec grid_{};
    int components_ = 0;
    std::vector<Complex> coeffs_;
    bool real_ = true;
    bool out_of_range_ = false;
};

SpectralField transform_forward(const RealField& field);
/// Throws DomainError when the field is flagged complex.
RealField transform_inverse(const SpectralField& field);

/// Fourier multiplier xi -> s(xi).
struct Symbol {
    std::string name;
    std::function<Complex(const Wavevector&)> eval;
};

namespace symbols {
Symbol identity();
/// |xi|^2 (so apply_symbol(f, abs_sq()) == -Laplacian f).
Symbol abs_sq();
Symbol laplacian();
/// |xi|^s, with the value 0 at xi = 0 for every s.
Symbol lambda_power(double s);
/// |xi|_1 = sum_i |xi_i|.
Symbol lambda1();
/// i xi_axis (Nyquist component zeroed).
Symbol derivative(int axis);
/// exp(tau |xi|_1).
Symbol gevrey(double tau);
Symbol product(Symbol a, Symbol b);
}  // namespace symbols

/// Multiplies every coefficient by s(xi_k). When the input is real and the
/// output loses Hermitian symmetry the result is flagged complex.
SpectralField apply_symbol(const SpectralField& f, const Symbol& s);

struct LeraySplit {
    SpectralField solenoidal;    ///< P m, divergence free
    SpectralField compressible;  ///< Q m = xi (xi . m) / |xi|^2
};

/// Helmholtz split of a d-component field. The xi = 0 mode goes to P m.
LeraySplit leray_project(const SpectralField& m);

SpectralField gradient(const SpectralField& scalar);
SpectralField divergence(const SpectralField& vector);
SpectralField laplacian(const SpectralField& f);

/// Discrete L^r norm on the physical grid with cell weight (L/N)^d. Vector
/// fields use the pointwise Euclidean magnitude. r = infinity is the grid max.
double lebesgue_norm(const SpectralField& f, double r);
double lebesgue_norm(const RealField& f, double r);

/// Zeroes every mode with some |k_i| above the 2/3 cutoff.
void apply_dealias(SpectralField& f);
bool is_dealiased(const SpectralField& f);
/// Removes the xi = 0 coefficient of every component.
void remove_mean(SpectralField& f);

/// Pointwise product of two scalar fields evaluated on the grid, with the
/// result truncated by the 2/3 rule when `dealias` is set.
SpectralField grid_product(const SpectralField& f, const SpectralField& g, bool dealias = true);

}  // namespace nsk
