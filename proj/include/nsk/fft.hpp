#pragma once

#include <complex>
#include <span>

namespace nsk {
struct GridSpec;
}

namespace nsk::detail {

// Unnormalized in-place FFTW transforms over the full complex lattice.
// Plans are created once per (dim, points, direction) and shared across
// threads; execution uses the new-array interface and is thread-safe.
void fft_forward(const GridSpec& grid, std::span<std::complex<double>> data);
void fft_backward(const GridSpec& grid, std::span<std::complex<double>> data);

}  // namespace nsk::detail
