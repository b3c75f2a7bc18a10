#include "nsk/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>

#include "nsk/error.hpp"

namespace nsk {

namespace {

constexpr double inner = 0.75;
constexpr double outer = 4.0 / 3.0;

double smooth_h(double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; }

double max_lattice_norm(const GridSpec& grid) {
    return std::sqrt(static_cast<double>(grid.dim)) * grid.nyquist();
}

}  // namespace

double lp_chi(double r) {
    if (r <= inner) return 1.0;
    if (r >= outer) return 0.0;
    const double x = (r - inner) / (outer - inner);
    const double a = smooth_h(1.0 - x);
    const double b = smooth_h(x);
    return a / (a + b);
}

double lp_phi(double r) { return lp_chi(0.5 * r) - lp_chi(r); }

DyadicPartition DyadicPartition::for_grid(const GridSpec& grid) {
    grid.validate();
    const double xi_min = grid.fundamental();
    const double xi_max = max_lattice_norm(grid);
    DyadicPartition p;
    p.j_min = static_cast<int>(std::floor(std::log2(3.0 * xi_min / 8.0))) + 1;
    p.j_max = static_cast<int>(std::ceil(std::log2(4.0 * xi_max / 3.0))) - 1;
    return p;
}

double DyadicPartition::weight(int j, double xi_norm) const {
    if (j < j_min || j > j_max) return 0.0;
    return lp_phi(std::ldexp(xi_norm, -j));
}

int DyadicPartition::lower_block(double xi_norm) const {
    return static_cast<int>(std::floor(std::log2(3.0 * xi_norm / 8.0))) + 1;
}

double DyadicPartition::partition_residual(const GridSpec& grid) const {
    double worst = 0.0;
    for_each_mode(grid, [&](std::size_t, const Wavevector& w) {
        if (w.is_zero()) return;
        const double r = w.norm();
        double s = 0.0;
        for (int j = j_min; j <= j_max; ++j) s += weight(j, r);
        worst = std::max(worst, std::abs(s - 1.0));
    });
    return worst;
}

void BesovSpec::validate() const {
    if (!(p >= 1.0)) throw DomainError("BesovSpec: p must be >= 1");
    if (!(r >= 1.0)) throw DomainError("BesovSpec: r must be >= 1");
}

int default_j0(const GridSpec& grid) {
    const auto part = DyadicPartition::for_grid(grid);
    return std::clamp(0, part.j_min, part.j_max);
}

BlockRange band_range(const DyadicPartition& part, Band band, int j0) {
    switch (band) {
        case Band::low: return {part.j_min, std::min(j0 - 1, part.j_max)};
        case Band::high: return {std::max(j0, part.j_min), part.j_max};
        case Band::all: break;
    }
    return {part.j_min, part.j_max};
}

SpectralField dyadic_block(const SpectralField& f, int j) {
    const auto part = DyadicPartition::for_grid(f.grid());
    SpectralField out(f.grid(), f.components());
    if (j < part.j_min || j > part.j_max) {
        out.mark_out_of_range();
        return out;
    }
    for_each_mode(f.grid(), [&](std::size_t idx, const Wavevector& w) {
        const double phi = part.weight(j, w.norm());
        if (phi == 0.0) return;
        for (int c = 0; c < f.components(); ++c) out.at(c, idx) = phi * f.at(c, idx);
    });
    if (!f.is_real()) out.mark_complex();
    return out;
}

std::vector<double> block_norms(const SpectralField& f, double p, BlockRange range, const ModeWeight& weight) {
    if (!(p >= 1.0)) throw DomainError("block_norms: p must be >= 1");
    std::vector<double> out;
    if (range.empty()) return out;
    const auto part = DyadicPartition::for_grid(f.grid());
    const auto nblocks = static_cast<std::size_t>(range.hi - range.lo + 1);
    out.assign(nblocks, 0.0);

    if (p == 2.0) {
        for_each_mode(f.grid(), [&](std::size_t idx, const Wavevector& w) {
            if (w.is_zero()) return;
            double e = 0.0;
            for (int c = 0; c < f.components(); ++c) e += std::norm(f.at(c, idx));
            if (e == 0.0) return;
            if (weight) {
                const double x = weight(w);
                e *= x * x;
            }
            const double r = w.norm();
            const int jl = part.lower_block(r);
            for (int j = jl; j <= jl + 1; ++j) {
                if (j < range.lo || j > range.hi) continue;
                const double phi = part.weight(j, r);
                out[static_cast<std::size_t>(j - range.lo)] += phi * phi * e;
            }
        });
        const double vol = f.grid().volume();
        for (auto& v : out) v = std::sqrt(v * vol);
        return out;
    }

    SpectralField source = f;
    if (weight) {
        for_each_mode(f.grid(), [&](std::size_t idx, const Wavevector& w) {
            const double x = weight(w);
            for (int c = 0; c < f.components(); ++c) source.at(c, idx) *= x;
        });
    }
    for (int j = range.lo; j <= range.hi; ++j) {
        const SpectralField b = dyadic_block(source, j);
        out[static_cast<std::size_t>(j - range.lo)] = b.is_zero() ? 0.0 : lebesgue_norm(b, p);
    }
    return out;
}

double lr_sum(std::span<const double> blocks, int j_first, double s, double r) {
    if (!(r >= 1.0)) throw DomainError("lr_sum: r must be >= 1");
    double acc = 0.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const double v = std::exp2(s * (j_first + static_cast<int>(i))) * blocks[i];
        if (std::isinf(r))
            acc = std::max(acc, v);
        else
            acc += std::pow(v, r);
    }
    return std::isinf(r) ? acc : std::pow(acc, 1.0 / r);
}

NormReport besov_report(const SpectralField& f, const BesovSpec& spec, Band band, int j0, const ModeWeight& weight) {
    spec.validate();
    NormReport rep;
    rep.range = band_range(DyadicPartition::for_grid(f.grid()), band, j0);
    if (rep.range.empty()) {
        rep.empty_band = true;
        return rep;
    }
    rep.blocks = block_norms(f, spec.p, rep.range, weight);
    rep.value = lr_sum(rep.blocks, rep.range.lo, spec.s, spec.r);
    return rep;
}

double besov_norm(const SpectralField& f, const BesovSpec& spec, Band band, int j0, const ModeWeight& weight) {
    return besov_report(f, spec, band, j0, weight).value;
}

double hybrid_norm(const SpectralField& f, const HybridBesovSpec& spec, const ModeWeight& weight) {
    return besov_norm(f, spec.high, Band::high, spec.j0, weight) +
           besov_norm(f, spec.low, Band::low, spec.j0, weight);
}

namespace {

double time_norm(std::span<const double> t, std::span<const double> a, double rho) {
    if (std::isinf(rho)) return *std::max_element(a.begin(), a.end());
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
        acc += 0.5 * (t[i] - t[i - 1]) * (std::pow(a[i], rho) + std::pow(a[i - 1], rho));
    return std::pow(acc, 1.0 / rho);
}

double band_cl(std::span<const SpectralField> samples, const CheminLernerSpec& spec, const BesovSpec& b,
               double rho, Band band, const std::function<ModeWeight(double)>& weight_at) {
    const auto& times = spec.time_samples;
    const auto range = band_range(DyadicPartition::for_grid(samples[0].grid()), band, spec.space.j0);
    if (range.empty()) return 0.0;
    const auto nb = static_cast<std::size_t>(range.hi - range.lo + 1);
    std::vector<std::vector<double>> per_block(nb, std::vector<double>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto bn = block_norms(samples[i], b.p, range, weight_at ? weight_at(times[i]) : ModeWeight{});
        for (std::size_t j = 0; j < nb; ++j) per_block[j][i] = bn[j];
    }
    std::vector<double> blocks(nb);
    for (std::size_t j = 0; j < nb; ++j) blocks[j] = time_norm(times, per_block[j], rho);
    return lr_sum(blocks, range.lo, b.s, b.r);
}

}  // namespace

CheminLernerResult chemin_lerner_norm(std::span<const SpectralField> samples, const CheminLernerSpec& spec,
                                      const std::function<ModeWeight(double)>& weight_at) {
    if (spec.time_samples.empty()) throw ConfigurationError("chemin_lerner_norm: no time samples");
    if (spec.time_samples.size() != samples.size())
        throw ConfigurationError("chemin_lerner_norm: samples do not match time_samples");
    for (std::size_t i = 1; i < spec.time_samples.size(); ++i)
        if (!(spec.time_samples[i] > spec.time_samples[i - 1]))
            throw ConfigurationError("chemin_lerner_norm: time_samples must be strictly increasing");
    CheminLernerResult res;
    if (samples.size() == 1 && (std::isfinite(spec.rho_high) || std::isfinite(spec.rho_low))) {
        res.degenerate = true;
        return res;
    }
    res.value = band_cl(samples, spec, spec.space.high, spec.rho_high, Band::high, weight_at) +
                band_cl(samples, spec, spec.space.low, spec.rho_low, Band::low, weight_at);
    return res;
}

double bernstein_check(const SpectralField& f, int j, double p, double q) {
    if (p > q) throw DomainError("bernstein_check: requires p <= q");
    const SpectralField b = dyadic_block(f, j);
    if (b.is_zero()) return 0.0;
    if (p == q) return 1.0;
    const double np = lebesgue_norm(b, p);
    const double nq = lebesgue_norm(b, q);
    const double d = f.grid().dim;
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    return nq / (std::exp2(j * d * (1.0 / p - inv_q)) * np);
}

}  // namespace nsk
