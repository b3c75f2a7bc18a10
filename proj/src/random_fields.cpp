#include "nsk/random_fields.hpp"

#include <cmath>

namespace nsk {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * pi * u2);
}

SpectralField random_phase_field(const GridSpec& grid, int components,
                                 const std::function<double(const Wavevector&)>& amplitude, Rng& rng) {
    SpectralField out(grid, components);
    for_each_mode(grid, [&](std::size_t idx, const Wavevector& w) {
        const std::size_t conj = conjugate_index(grid, idx);
        if (conj < idx) return;
        const double amp = amplitude(w);
        for (int c = 0; c < components; ++c) {
            if (amp == 0.0) continue;
            if (conj == idx) {
                out.at(c, idx) = rng.uniform() < 0.5 ? -amp : amp;
            } else {
                const Complex v = std::polar(amp, rng.phase());
                out.at(c, idx) = v;
                out.at(c, conj) = std::conj(v);
            }
        }
    });
    return out;
}

SpectralField random_band_limited(const GridSpec& grid, int components, int kmax, Rng& rng) {
    SpectralField out(grid, components);
    for_each_mode(grid, [&](std::size_t idx, const Wavevector& w) {
        const std::size_t conj = conjugate_index(grid, idx);
        if (conj <= idx || w.is_zero()) return;
        for (int i = 0; i < w.dim; ++i)
            if (std::abs(w.k[static_cast<std::size_t>(i)]) > kmax) return;
        for (int c = 0; c < components; ++c) {
            const Complex v(rng.normal(), rng.normal());
            out.at(c, idx) = v;
            out.at(c, conj) = std::conj(v);
        }
    });
    return out;
}

}  // namespace nsk
