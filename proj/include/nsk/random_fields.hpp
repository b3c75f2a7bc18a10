#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "nsk/spectral_core.hpp"

namespace nsk {

/// splitmix64 mix of master + stream; used for per-draw seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Portable random source: the uniform and normal transforms are written
/// out here so that streams agree across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double normal();
    double phase() { return 2.0 * pi * uniform(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Random-phase field with |c(k)| = amplitude(w) per component and exact
/// Hermitian symmetry. Self-conjugate modes get a real coefficient of random sign.
SpectralField random_phase_field(const GridSpec& grid, int components,
                                 const std::function<double(const Wavevector&)>& amplitude, Rng& rng);

/// Complex Gaussian coefficients on modes with max_i |k_i| <= kmax (mean removed).
SpectralField random_band_limited(const GridSpec& grid, int components, int kmax, Rng& rng);

}  // namespace nsk
