#pragma once

#include <complex>
#include <cstring>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "dnls/grid.hpp"

namespace dnls {

using cplx = std::complex<double>;

/// Owns the FFTW plans and scratch buffer for one grid. A workspace is bound
/// to a single run (or diagnostics context) and must not be shared across
/// threads; plan creation itself is serialized through a global mutex.
/// Plans use FFTW_ESTIMATE so planning is deterministic and results are
/// bit-reproducible across repeated runs on the same platform.
class SpectralWorkspace {
public:
    explicit SpectralWorkspace(const Grid& grid) : grid_(grid) {
        const std::size_t total = grid.size();
        int dims[3] = {0, 0, 0};
        for (int a = 0; a < grid.dim(); ++a) dims[a] = grid.points_per_axis();
        std::lock_guard<std::mutex> lock(planner_mutex());
        buf_ = fftw_alloc_complex(total);
        fwd_ = fftw_plan_dft(grid.dim(), dims, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft(grid.dim(), dims, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~SpectralWorkspace() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    const Grid& grid() const { return grid_; }

    /// In-place forward transform, unnormalized.
    void forward(std::vector<cplx>& data) { execute(data, fwd_, 1.0); }

    /// In-place inverse transform, normalized by 1/size.
    void backward(std::vector<cplx>& data) {
        execute(data, bwd_, 1.0 / static_cast<double>(grid_.size()));
    }

private:
    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

    void execute(std::vector<cplx>& data, fftw_plan plan, double scale) {
        const std::size_t total = grid_.size();
        if (data.size() != total)
            throw std::invalid_argument("field size does not match workspace grid");
        std::memcpy(buf_, data.data(), total * sizeof(cplx));
        fftw_execute(plan);
        std::memcpy(data.data(), buf_, total * sizeof(cplx));
        if (scale != 1.0)
            for (auto& z : data) z *= scale;
    }

    Grid grid_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

}  // namespace dnls
