#pragma once

#include <cmath>
#include <complex>
#include <iostream>
#include <vector>

#include "dnls/grid.hpp"

namespace dnls {

using cplx = std::complex<double>;

/// Complex state on a periodic grid at one instant.
struct Field {
    Grid grid;
    double time = 0.0;
    std::vector<cplx> values;
};

inline Field make_field(const Grid& grid, double time = 0.0) {
    Field f;
    f.grid = grid;
    f.time = time;
    f.values.assign(grid.size(), cplx(0.0, 0.0));
    return f;
}

inline bool all_finite(const Field& f) {
    for (const auto& z : f.values)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

/// Squared distance from the box centre of the lattice point with flat index p.
inline double radius_sq(const Grid& grid, std::size_t p) {
    const auto idx = grid.unflatten(p);
    double r2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
        const double x = grid.coord(idx[a]);
        r2 += x * x;
    }
    return r2;
}

/// u0(x) = A exp(-|x|^2 / (2 sigma^2)) exp(i b |x|^2), centred in the box.
/// Real data (b = 0) has identically zero imaginary part. Warns on stderr when
/// the boundary amplitude exceeds 1e-12 * A, i.e. the box truncates the tails.
inline Field gaussian_data(const Grid& grid, double amplitude, double width, double chirp) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian width must be positive");
    Field f = make_field(grid);
    const double inv2s2 = 1.0 / (2.0 * width * width);
    for (std::size_t p = 0; p < f.values.size(); ++p) {
        const double r2 = radius_sq(grid, p);
        const double mag = amplitude * std::exp(-r2 * inv2s2);
        const double phase = chirp * r2;
        f.values[p] = (chirp == 0.0) ? cplx(mag, 0.0)
                                     : cplx(mag * std::cos(phase), mag * std::sin(phase));
    }
    // Boundary check along each axis face x = -L/2 (the farthest lattice plane).
    const double edge = grid.coord(0);
    const double boundary_mag = amplitude * std::exp(-edge * edge * inv2s2);
    if (boundary_mag > 1e-12 * std::abs(amplitude))
        std::cerr << "[dnls] warning: gaussian truncated at box boundary, |u|="
                  << boundary_mag << " exceeds 1e-12*A\n";
    return f;
}

/// Spatially uniform field, the zero-dispersion test state.
inline Field constant_data(const Grid& grid, cplx value) {
    Field f = make_field(grid);
    for (auto& z : f.values) z = value;
    return f;
}

}  // namespace dnls
