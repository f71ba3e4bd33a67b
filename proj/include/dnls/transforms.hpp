#pragma once

#include <cmath>
#include <stdexcept>

#include "dnls/fft.hpp"
#include "dnls/field.hpp"

namespace dnls {

enum class VariableDirection {
    ToTransformed,  // v = e^{a t} u
    ToPhysical,     // u = e^{-a t} v
};

/// Exponential change of variable between the damped state u and the
/// mass-conserving state v. Involutive pair. Exponents beyond 700 would
/// overflow double range and are rejected.
inline Field change_variable(const Field& f, double t, double damping,
                             VariableDirection direction) {
    const double exponent =
        (direction == VariableDirection::ToTransformed ? 1.0 : -1.0) * damping * t;
    if (std::abs(exponent) > 700.0)
        throw std::domain_error("change_variable: |a t| too large, scale factor overflows");
    const double scale = std::exp(exponent);
    Field out = f;
    for (auto& z : out.values) z *= scale;
    return out;
}

/// Free propagator: multiplies each mode by exp(-i |k|^2 t). Exact and
/// norm-preserving; negative t reverses the flow.
inline Field free_propagate(const Field& f, double t, SpectralWorkspace& ws) {
    if (!std::isfinite(t)) throw std::invalid_argument("free_propagate: t must be finite");
    Field out = f;
    ws.forward(out.values);
    const Grid& g = out.grid;
    const int n = g.points_per_axis();
    std::vector<double> k(n);
    for (int m = 0; m < n; ++m) k[m] = g.wavenumber(m);
    for (std::size_t p = 0; p < out.values.size(); ++p) {
        const auto idx = g.unflatten(p);
        double k2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) k2 += k[idx[a]] * k[idx[a]];
        const double phase = -k2 * t;
        out.values[p] *= cplx(std::cos(phase), std::sin(phase));
    }
    ws.backward(out.values);
    return out;
}

}  // namespace dnls
