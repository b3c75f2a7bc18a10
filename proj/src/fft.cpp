#include "nsk/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "nsk/error.hpp"
#include "nsk/spectral_core.hpp"

namespace nsk::detail {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int dim, int points, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(dim, points, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        std::vector<int> n(static_cast<std::size_t>(dim), points);
        std::size_t total = 1;
        for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(points);
        auto* scratch = fftw_alloc_complex(total);
        // ESTIMATE keeps the algorithm choice independent of timing, so
        // repeated runs are bit-identical.
        fftw_plan plan = fftw_plan_dft(dim, n.data(), scratch, scratch, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        if (plan == nullptr) throw ConfigurationError("fftw: plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

void execute(const GridSpec& grid, std::span<std::complex<double>> data, int sign) {
    if (data.size() != grid.size())
        throw ConfigurationError("fft: buffer size does not match grid");
    fftw_plan plan = cache().get(grid.dim, grid.points, sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

}  // namespace

void fft_forward(const GridSpec& grid, std::span<std::complex<double>> data) {
    execute(grid, data, FFTW_FORWARD);
}

void fft_backward(const GridSpec& grid, std::span<std::complex<double>> data) {
    execute(grid, data, FFTW_BACKWARD);
}

}  // namespace nsk::detail
