#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nsk/spectral_core.hpp"

namespace nsk {

/// Smooth radial step: 1 on [0, 3/4], 0 on [4/3, inf).
double lp_chi(double r);
/// Annulus bump phi(r) = chi(r/2) - chi(r), supported in [3/4, 8/3].
double lp_phi(double r);

/// Littlewood-Paley family phi(2^-j xi) restricted to the blocks that meet
/// the lattice of a grid.
struct DyadicPartition {
    int j_min = 0;
    int j_max = 0;

    static DyadicPartition for_grid(const GridSpec& grid);

    double weight(int j, double xi_norm) const;
    /// Blocks j, j+1 that can be nonzero at |xi| (j+1 may fall outside the range).
    int lower_block(double xi_norm) const;
    /// max over the lattice of |sum_j phi_j - 1| (zero mode excluded).
    double partition_residual(const GridSpec& grid) const;
};

struct BesovSpec {
    double s = 0.0;
    double p = 2.0;
    double r = 2.0;  ///< summation index, may be infinity

    void validate() const;
};

struct HybridBesovSpec {
    BesovSpec high;
    BesovSpec low;
    int j0 = 0;
};

struct CheminLernerSpec {
    double rho_high = infinity;
    double rho_low = infinity;
    HybridBesovSpec space;
    std::vector<double> time_samples;
};

enum class Band { all, low, high };

/// Default cutoff: 2^j0 = 1 in box units, clamped to the resolvable range.
int default_j0(const GridSpec& grid);

struct BlockRange {
    int lo = 0;
    int hi = -1;
    bool empty() const { return hi < lo; }
};

/// Blocks of the partition selected by band: low is j < j0, high is j >= j0.
BlockRange band_range(const DyadicPartition& part, Band band, int j0);

/// Delta_j f. Outside [j_min, j_max] the result is zero and flagged out_of_range.
SpectralField dyadic_block(const SpectralField& f, int j);

/// Optional extra Fourier weight applied to the field before blocking
/// (used for Gevrey-amplified norms).
using ModeWeight = std::function<double(const Wavevector&)>;

/// ||Delta_j f||_{L^p} for j in range. p = 2 uses Plancherel, other p go
/// through the physical grid. Vector fields use the pointwise Euclidean norm.
std::vector<double> block_norms(const SpectralField& f, double p, BlockRange range,
                                const ModeWeight& weight = {});

/// l^r over j of 2^{js} a_j.
double lr_sum(std::span<const double> blocks, int j_first, double s, double r);

struct NormReport {
    double value = 0.0;
    BlockRange range;
    std::vector<double> blocks;  ///< ||Delta_j f||_{L^p}, j = range.lo..range.hi
    bool empty_band = false;
};

NormReport besov_report(const SpectralField& f, const BesovSpec& spec, Band band, int j0,
                        const ModeWeight& weight = {});
double besov_norm(const SpectralField& f, const BesovSpec& spec, Band band = Band::all, int j0 = 0,
                  const ModeWeight& weight = {});
double hybrid_norm(const SpectralField& f, const HybridBesovSpec& spec, const ModeWeight& weight = {});

struct CheminLernerResult {
    double value = 0.0;
    bool degenerate = false;  ///< single sample with a finite time exponent
};

/// Block-wise L^rho in time (trapezoid over the samples, max for rho = inf),
/// then the weighted l^r over j, split at j0.
CheminLernerResult chemin_lerner_norm(std::span<const SpectralField> samples, const CheminLernerSpec& spec,
                                      const std::function<ModeWeight(double)>& weight_at = {});

/// ||Delta_j f||_q / (2^{jd(1/p-1/q)} ||Delta_j f||_p).
double bernstein_check(const SpectralField& f, int j, double p, double q);

}  // namespace nsk
