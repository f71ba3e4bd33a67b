#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>

namespace dnls {

/// Periodic cubic box [-L/2, L/2)^d sampled on n points per axis.
/// n must be a power of two (radix requirement of the spectral transform).
/// Values live on a row-major lattice; axis 0 is the slowest index.
class Grid {
public:
    Grid() = default;

    static Grid make(double extent, int points, int dim) {
        if (!(extent > 0.0))
            throw std::invalid_argument("grid extent must be positive");
        if (dim < 1 || dim > 3)
            throw std::invalid_argument("grid dimension must be 1, 2 or 3");
        if (points < 2 || (points & (points - 1)) != 0)
            throw std::invalid_argument("points per axis must be a power of two >= 2");
        Grid g;
        g.extent_ = extent;
        g.points_ = points;
        g.dim_ = dim;
        g.shift_ = 0;
        while ((1 << g.shift_) < points) ++g.shift_;
        return g;
    }

    double extent() const { return extent_; }
    int points_per_axis() const { return points_; }
    int dim() const { return dim_; }
    double spacing() const { return extent_ / points_; }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim_; ++a) s *= static_cast<std::size_t>(points_);
        return s;
    }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim_; ++a) v *= spacing();
        return v;
    }

    /// Coordinate of lattice index i along any axis, measured from the box centre.
    double coord(int i) const { return -0.5 * extent_ + i * spacing(); }

    /// Wavenumber of transform index m, standard order 0,..,n/2-1,-n/2,..,-1.
    double wavenumber(int m) const {
        const int half = points_ / 2;
        const int signed_m = (m < half) ? m : m - points_;
        return 2.0 * std::numbers::pi / extent_ * signed_m;
    }

    /// Signed integer mode of transform index m.
    int mode(int m) const {
        const int half = points_ / 2;
        return (m < half) ? m : m - points_;
    }

    /// Decompose a flat row-major index into per-axis indices (unused axes 0).
    std::array<int, 3> unflatten(std::size_t p) const {
        const std::size_t mask = static_cast<std::size_t>(points_) - 1;
        std::array<int, 3> idx{0, 0, 0};
        for (int a = dim_ - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(p & mask);
            p >>= shift_;
        }
        return idx;
    }

    bool operator==(const Grid&) const = default;

private:
    double extent_ = 0.0;
    int points_ = 0;
    int dim_ = 0;
    int shift_ = 0;
};

}  // namespace dnls
