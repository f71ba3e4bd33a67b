#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dnls/cutoff.hpp"
#include "dnls/fft.hpp"
#include "dnls/field.hpp"
#include "dnls/problem.hpp"
#include "dnls/transforms.hpp"

namespace dnls {

// ---------------------------------------------------------------------------
// basic quadratures

/// L^2 mass h^d sum |u|^2, evaluated pointwise in physical space.
inline double mass(const Field& f) {
    double acc = 0.0;
    for (const auto& z : f.values) acc += std::norm(z);
    return acc * f.grid.cell_volume();
}

/// Same quantity summed in spectral space; agrees with mass() to rounding.
inline double parseval_mass(const Field& f, SpectralWorkspace& ws) {
    std::vector<cplx> hat = f.values;
    ws.forward(hat);
    double acc = 0.0;
    for (const auto& z : hat) acc += std::norm(z);
    return acc * f.grid.cell_volume() / static_cast<double>(f.grid.size());
}

/// h^d sum |u|^p for p >= 1 (the L^p norm raised to p).
inline double lp_norm_pow(const Field& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm_pow: p must be >= 1");
    const double half_p = 0.5 * p;
    double acc = 0.0;
    for (const auto& z : f.values) acc += std::pow(std::norm(z), half_p);
    return acc * f.grid.cell_volume();
}

inline double sup_abs(const Field& f) {
    double best = 0.0;
    for (const auto& z : f.values) best = std::max(best, std::norm(z));
    return std::sqrt(best);
}

/// Fraction of spectral mass carried by modes with |m| >= n/3 on some axis.
/// A growing tail is the resolution-loss sentinel near collapse.
inline double tail_fraction_of_spectrum(const Grid& grid, const std::vector<cplx>& hat) {
    const int n = grid.points_per_axis();
    double total = 0.0, tail = 0.0;
    for (std::size_t p = 0; p < hat.size(); ++p) {
        const double w = std::norm(hat[p]);
        total += w;
        const auto idx = grid.unflatten(p);
        bool is_tail = false;
        for (int a = 0; a < grid.dim(); ++a) {
            const int m = std::abs(grid.mode(idx[a]));
            if (3 * m >= n) { is_tail = true; break; }
        }
        if (is_tail) tail += w;
    }
    return total > 0.0 ? tail / total : 0.0;
}

inline double tail_fraction(const Field& f, SpectralWorkspace& ws) {
    std::vector<cplx> hat = f.values;
    ws.forward(hat);
    return tail_fraction_of_spectrum(f.grid, hat);
}

/// Share of mass sitting outside radius L/4 from the box centre. When this is
/// not negligible the periodic images pollute the weighted functionals.
inline double boundary_mass_fraction(const Field& f) {
    const double limit_sq = 0.0625 * f.grid.extent() * f.grid.extent();  // (L/4)^2
    double total = 0.0, outside = 0.0;
    for (std::size_t p = 0; p < f.values.size(); ++p) {
        const double w = std::norm(f.values[p]);
        total += w;
        if (radius_sq(f.grid, p) > limit_sq) outside += w;
    }
    return total > 0.0 ? outside / total : 0.0;
}

// ---------------------------------------------------------------------------
// spectral derivatives

struct GradientField {
    int dim = 0;
    std::array<std::vector<cplx>, 3> comp;
};

namespace detail {

inline std::vector<double> axis_wavenumbers(const Grid& g) {
    std::vector<double> k(g.points_per_axis());
    for (int m = 0; m < g.points_per_axis(); ++m) k[m] = g.wavenumber(m);
    return k;
}

inline double modes_weighted_sum_ksq(const Grid& g, const std::vector<cplx>& hat) {
    const auto k = axis_wavenumbers(g);
    double acc = 0.0;
    for (std::size_t p = 0; p < hat.size(); ++p) {
        const auto idx = g.unflatten(p);
        double k2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) k2 += k[idx[a]] * k[idx[a]];
        acc += k2 * std::norm(hat[p]);
    }
    return acc;
}

inline GradientField gradient_from_spectrum(const Grid& g, const std::vector<cplx>& hat,
                                            SpectralWorkspace& ws) {
    const auto k = axis_wavenumbers(g);
    GradientField grad;
    grad.dim = g.dim();
    for (int a = 0; a < g.dim(); ++a) {
        grad.comp[a].resize(hat.size());
        for (std::size_t p = 0; p < hat.size(); ++p) {
            const auto idx = g.unflatten(p);
            grad.comp[a][p] = cplx(0.0, k[idx[a]]) * hat[p];
        }
        ws.backward(grad.comp[a]);
    }
    return grad;
}

}  // namespace detail

inline GradientField gradient(const Field& f, SpectralWorkspace& ws) {
    std::vector<cplx> hat = f.values;
    ws.forward(hat);
    return detail::gradient_from_spectrum(f.grid, hat, ws);
}

/// ||grad u||_{L^2}^2 via the Parseval sum.
inline double grad_sq(const Field& f, SpectralWorkspace& ws) {
    std::vector<cplx> hat = f.values;
    ws.forward(hat);
    return detail::modes_weighted_sum_ksq(f.grid, hat) * f.grid.cell_volume() /
           static_cast<double>(f.grid.size());
}

/// Discrete H^1 norm sqrt(sum (1+|k|^2)|f_hat|^2 * normalization).
inline double h1_norm(const Field& f, SpectralWorkspace& ws) {
    std::vector<cplx> hat = f.values;
    ws.forward(hat);
    const auto k = detail::axis_wavenumbers(f.grid);
    double acc = 0.0;
    for (std::size_t p = 0; p < hat.size(); ++p) {
        const auto idx = f.grid.unflatten(p);
        double k2 = 0.0;
        for (int a = 0; a < f.grid.dim(); ++a) k2 += k[idx[a]] * k[idx[a]];
        acc += (1.0 + k2) * std::norm(hat[p]);
    }
    return std::sqrt(acc * f.grid.cell_volume() / static_cast<double>(f.grid.size()));
}

/// W^{1,r} norm: ( ||f||_{L^r}^r + || |grad f| ||_{L^r}^r )^{1/r}, gradient spectral.
inline double sobolev_w1r_norm(const Field& f, double r, SpectralWorkspace& ws) {
    if (!(r >= 1.0)) throw std::invalid_argument("sobolev_w1r_norm: r must be >= 1");
    const GradientField grad = gradient(f, ws);
    const double half_r = 0.5 * r;
    double acc = 0.0;
    for (std::size_t p = 0; p < f.values.size(); ++p) {
        double g2 = 0.0;
        for (int a = 0; a < grad.dim; ++a) g2 += std::norm(grad.comp[a][p]);
        acc += std::pow(std::norm(f.values[p]), half_r) + std::pow(g2, half_r);
    }
    return std::pow(acc * f.grid.cell_volume(), 1.0 / r);
}

// ---------------------------------------------------------------------------
// energies

struct Energy {
    double e = 0.0;  // (1/2)||grad u||^2 + mu/(alpha+2) ||u||^{alpha+2}
    double k = 0.0;  // ||grad u||^2 + mu ||u||^{alpha+2}
};

inline Energy energy(const Field& u, const ProblemSpec& spec, SpectralWorkspace& ws) {
    const double g = grad_sq(u, ws);
    const double pot = lp_norm_pow(u, spec.alpha + 2.0);
    return Energy{0.5 * g + spec.mu * pot / (spec.alpha + 2.0), g + spec.mu * pot};
}

/// Energy of the transformed state: H(v,t) = (1/2)||grad v||^2
/// + mu e^{-a alpha t}/(alpha+2) ||v||^{alpha+2}. Equals E(u0) at t = 0.
inline double transformed_energy(const Field& v, double t, const ProblemSpec& spec,
                                 SpectralWorkspace& ws) {
    const double g = grad_sq(v, ws);
    const double pot = lp_norm_pow(v, spec.alpha + 2.0);
    return 0.5 * g + spec.mu * std::exp(-spec.damping * spec.alpha * t) * pot /
                         (spec.alpha + 2.0);
}

// ---------------------------------------------------------------------------
// weighted functionals

/// variance = ||x u||^2 (or its chi_R-localized version),
/// momentum = integral of grad(weight)/2 . Im(grad u conj u); for the
/// quadratic weight this is the classical x . Im(grad u conj u) integral.
struct Moments {
    double variance = 0.0;
    double momentum = 0.0;
};

namespace detail {

// Shared kernel for the quadratic weight |x|^2 (cutoff == nullptr) and the
// localized weight chi_R. Returns (integral of weight |u|^2,
//                                  integral of x-type . Im(grad u conj u)).
inline Moments weighted_kernel(const Field& f, const GradientField& grad,
                               const RadialCutoff* cutoff) {
    const Grid& g = f.grid;
    double variance = 0.0, momentum = 0.0;
    for (std::size_t p = 0; p < f.values.size(); ++p) {
        const auto idx = g.unflatten(p);
        double r2 = 0.0;
        double x[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < g.dim(); ++a) {
            x[a] = g.coord(idx[a]);
            r2 += x[a] * x[a];
        }
        const cplx u = f.values[p];
        double x_dot_im = 0.0;  // sum_a x_a Im(d_a u conj(u))
        for (int a = 0; a < g.dim(); ++a)
            x_dot_im += x[a] * std::imag(grad.comp[a][p] * std::conj(u));
        if (cutoff == nullptr) {
            variance += r2 * std::norm(u);
            momentum += x_dot_im;
        } else {
            const double r = std::sqrt(r2);
            variance += cutoff->chi(r) * std::norm(u);
            // grad chi_R = chi'(r) x/r; the ratio tends to chi''(0) = 2 at r=0.
            const double ratio = r > 0.0 ? cutoff->chi_derivative(r) / r : 2.0;
            momentum += ratio * x_dot_im;
        }
    }
    const double vol = g.cell_volume();
    return Moments{variance * vol, momentum * vol};
}

}  // namespace detail

/// I = ||x u||^2 and V = integral x . Im(grad u conj u); origin at box centre.
inline Moments weighted_moments(const Field& f, SpectralWorkspace& ws) {
    const GradientField grad = gradient(f, ws);
    return detail::weighted_kernel(f, grad, nullptr);
}

/// J = integral chi_R |u|^2 and W = integral grad(chi_R) . Im(grad u conj u).
inline Moments localized_moments(const Field& f, const RadialCutoff& cutoff,
                                 SpectralWorkspace& ws) {
    const GradientField grad = gradient(f, ws);
    return detail::weighted_kernel(f, grad, &cutoff);
}

/// V_chi(t) = integral chi |v|^2 and its instantaneous time derivative
/// 2 integral grad(chi) . Im(grad v conj v), both evaluated from the field.
/// cutoff == nullptr selects the pure quadratic weight chi = |x|^2.
struct VirialAction {
    double action = 0.0;
    double rate = 0.0;
};

inline VirialAction virial_action(const Field& v, const RadialCutoff* cutoff,
                                  SpectralWorkspace& ws) {
    const GradientField grad = gradient(v, ws);
    const Moments m = detail::weighted_kernel(v, grad, cutoff);
    // For chi = |x|^2: grad chi = 2x, so the rate is 4V; for chi_R it is 2W.
    return VirialAction{m.variance, cutoff ? 2.0 * m.momentum : 4.0 * m.momentum};
}

namespace detail {

/// Right side of the second-derivative virial identity:
///   - integral Lap^2(chi) |v|^2
///   + 4 integral [ (chi'/r)(|grad v|^2 - |d_r v|^2) + chi'' |d_r v|^2 ]
///   - (2 alpha/(alpha+2)) e^{-a alpha t} integral Lap(chi) |v|^{alpha+2}.
/// With chi = |x|^2 this reduces to 8||grad v||^2 - (4 N alpha/(alpha+2)) e^{-a alpha t} ||v||^{alpha+2}.
inline double virial_accel_kernel(const Field& v, const GradientField& grad, double t,
                                  const ProblemSpec& spec, const RadialCutoff* cutoff) {
    const Grid& g = v.grid;
    const int N = spec.dimension;
    const double expfac = std::exp(-spec.damping * spec.alpha * t);
    const double pot_coeff = 2.0 * spec.alpha / (spec.alpha + 2.0) * expfac;
    const double half_pow = 0.5 * (spec.alpha + 2.0);

    double acc = 0.0;
    for (std::size_t p = 0; p < v.values.size(); ++p) {
        const auto idx = g.unflatten(p);
        double x[3] = {0.0, 0.0, 0.0};
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            x[a] = g.coord(idx[a]);
            r2 += x[a] * x[a];
        }
        double grad2 = 0.0;
        for (int a = 0; a < grad.dim; ++a) grad2 += std::norm(grad.comp[a][p]);
        const double mod2 = std::norm(v.values[p]);
        const double pot_term = std::pow(mod2, half_pow);

        if (cutoff == nullptr) {
            acc += 8.0 * grad2 - pot_coeff * 2.0 * N * pot_term;
            continue;
        }
        const double r = std::sqrt(r2);
        const auto ev = cutoff->evaluate(r, N);
        double radial_sq = 0.0;  // |sum_a (x_a/r) d_a v|^2
        if (r > 0.0) {
            cplx dr(0.0, 0.0);
            for (int a = 0; a < grad.dim; ++a) dr += (x[a] / r) * grad.comp[a][p];
            radial_sq = std::norm(dr);
        }
        const double ratio = r > 0.0 ? ev.chi_p / r : ev.chi_pp;
        acc += -ev.bilaplacian * mod2 +
               4.0 * (ratio * (grad2 - radial_sq) + ev.chi_pp * radial_sq) -
               pot_coeff * ev.laplacian * pot_term;
    }
    return acc * g.cell_volume();
}

}  // namespace detail

/// d^2/dt^2 of the virial action, evaluated directly from the field.
inline double virial_acceleration(const Field& v, double t, const ProblemSpec& spec,
                                  const RadialCutoff* cutoff, SpectralWorkspace& ws) {
    const GradientField grad = gradient(v, ws);
    return detail::virial_accel_kernel(v, grad, t, spec, cutoff);
}

// ---------------------------------------------------------------------------
// per-instant diagnostic record

/// Every scalar functional at one time. mass/grad_sq/pot/E/K/sup refer to the
/// damped state u; H and the weighted functionals refer to v = e^{a t} u.
/// Without a cutoff the localized columns fall back to the quadratic weight
/// (local_variance = variance, local_momentum = momentum).
struct DiagnosticSample {
    double t = 0.0;
    double mass = 0.0;
    double grad_sq = 0.0;
    double pot = 0.0;
    double e = 0.0;
    double k = 0.0;
    double h = 0.0;
    double variance = 0.0;
    double momentum = 0.0;
    double local_variance = 0.0;
    double local_momentum = 0.0;
    double virial_action = 0.0;
    double virial_action_rate = 0.0;
    double virial_accel = 0.0;
    double sup_abs = 0.0;
    double tail_frac = 0.0;
    double boundary_frac = 0.0;
};

inline DiagnosticSample sample(const Field& u, const ProblemSpec& spec,
                               const RadialCutoff* cutoff, SpectralWorkspace& ws) {
    DiagnosticSample s;
    const double t = u.time;
    const double a = spec.damping;
    s.t = t;
    s.mass = mass(u);
    s.pot = lp_norm_pow(u, spec.alpha + 2.0);
    s.sup_abs = dnls::sup_abs(u);
    s.boundary_frac = boundary_mass_fraction(u);

    // Everything transformed is computed on v directly; it stays O(1) while u
    // decays, so no extreme rescaling enters the quadratures.
    const Field v = change_variable(u, t, a, VariableDirection::ToTransformed);
    std::vector<cplx> hat = v.values;
    ws.forward(hat);
    const double norm_fac = v.grid.cell_volume() / static_cast<double>(v.grid.size());
    const double grad_sq_v = detail::modes_weighted_sum_ksq(v.grid, hat) * norm_fac;
    s.tail_frac = tail_fraction_of_spectrum(v.grid, hat);

    const double decay2 = std::exp(-2.0 * a * t);
    s.grad_sq = decay2 * grad_sq_v;
    s.e = 0.5 * s.grad_sq + spec.mu * s.pot / (spec.alpha + 2.0);
    s.k = s.grad_sq + spec.mu * s.pot;

    const double pot_v = lp_norm_pow(v, spec.alpha + 2.0);
    s.h = 0.5 * grad_sq_v +
          spec.mu * std::exp(-a * spec.alpha * t) * pot_v / (spec.alpha + 2.0);

    const GradientField grad_v = detail::gradient_from_spectrum(v.grid, hat, ws);
    const Moments plain = detail::weighted_kernel(v, grad_v, nullptr);
    s.variance = plain.variance;
    s.momentum = plain.momentum;
    if (cutoff) {
        const Moments local = detail::weighted_kernel(v, grad_v, cutoff);
        s.local_variance = local.variance;
        s.local_momentum = local.momentum;
        s.virial_action = local.variance;
        s.virial_action_rate = 2.0 * local.momentum;
    } else {
        s.local_variance = plain.variance;
        s.local_momentum = plain.momentum;
        s.virial_action = plain.variance;
        s.virial_action_rate = 4.0 * plain.momentum;
    }
    s.virial_accel = detail::virial_accel_kernel(v, grad_v, t, spec, cutoff);
    return s;
}

// ---------------------------------------------------------------------------
// time-series functionals

/// Cumulative trapezoid of y over (possibly nonuniform) times.
inline std::vector<double> cumulative_trapezoid(std::span<const double> t,
                                                std::span<const double> y) {
    if (t.size() != y.size()) throw std::invalid_argument("series length mismatch");
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
    return out;
}

/// Triple cumulative trapezoid of coefficient * e^{-rate s} g(s).
inline std::vector<double> damping_triple_integral(std::span<const double> t,
                                                   std::span<const double> g,
                                                   double coefficient, double rate) {
    std::vector<double> weighted(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) weighted[i] = std::exp(-rate * t[i]) * g[i];
    auto c1 = cumulative_trapezoid(t, weighted);
    auto c2 = cumulative_trapezoid(t, c1);
    auto c3 = cumulative_trapezoid(t, c2);
    for (auto& x : c3) x *= coefficient;
    return c3;
}

namespace detail {

inline std::vector<double> sample_times(std::span<const DiagnosticSample> s) {
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = s[i].t;
    return t;
}

/// ||v(t)||^{alpha+2} reconstructed from the recorded pot of u.
inline std::vector<double> pot_of_v(std::span<const DiagnosticSample> s,
                                    const ProblemSpec& spec) {
    std::vector<double> g(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        g[i] = std::exp((spec.alpha + 2.0) * spec.damping * s[i].t) * s[i].pot;
    return g;
}

}  // namespace detail

/// Residual of the integral energy law: H(v(t)) - H(v(0))
/// + (a alpha mu/(alpha+2)) * cumtrapz e^{-a alpha s} ||v(s)||^{alpha+2}.
/// Zero for exact dynamics and exact quadrature; t=0 entry is identically 0.
inline std::vector<double> energy_identity_residual(std::span<const DiagnosticSample> s,
                                                    const ProblemSpec& spec) {
    const auto t = detail::sample_times(s);
    auto g = detail::pot_of_v(s, spec);
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] *= std::exp(-spec.damping * spec.alpha * t[i]);
    const auto integral = cumulative_trapezoid(t, g);
    const double gain = spec.damping * spec.alpha * spec.mu / (spec.alpha + 2.0);
    std::vector<double> res(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i)
        res[i] = s[i].h - s[0].h + gain * integral[i];
    return res;
}

/// The triple damping integral built from recorded samples.
inline std::vector<double> damping_triple_integral(std::span<const DiagnosticSample> s,
                                                   const ProblemSpec& spec,
                                                   double coefficient, double rate) {
    const auto t = detail::sample_times(s);
    const auto g = detail::pot_of_v(s, spec);
    return damping_triple_integral(t, g, coefficient, rate);
}

/// Exponentially weighted H^1 distance between u(t) and the damped free
/// evolution of u_plus: e^{a t} ||u(t) - e^{-a t} e^{i t Lap} u_plus||_{H^1},
/// evaluated in the transformed variable so both terms stay O(1).
inline double scattering_deficit(const Field& u, const Field& u_plus,
                                 const ProblemSpec& spec, SpectralWorkspace& ws) {
    const Field v = change_variable(u, u.time, spec.damping, VariableDirection::ToTransformed);
    const Field w = free_propagate(u_plus, u.time, ws);
    Field diff = v;
    for (std::size_t p = 0; p < diff.values.size(); ++p) diff.values[p] -= w.values[p];
    return h1_norm(diff, ws);
}

/// Space-time norm: L^q in time of the W^{1,r} spatial norm over a snapshot
/// series, trapezoid in time. The energy-critical exponents are
/// q = 2N/(N-2), r = 2N^2/(N^2-2N+4) for N >= 3.
inline double strichartz_norm(std::span<const Field> snapshots, double q, double r,
                              SpectralWorkspace& ws) {
    if (!(q >= 1.0) || !(r >= 1.0))
        throw std::invalid_argument("strichartz_norm: q and r must be >= 1");
    if (snapshots.empty()) return 0.0;
    if (snapshots.size() == 1) return sobolev_w1r_norm(snapshots[0], r, ws);
    std::vector<double> t(snapshots.size()), y(snapshots.size());
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        t[i] = snapshots[i].time;
        y[i] = std::pow(sobolev_w1r_norm(snapshots[i], r, ws), q);
    }
    const auto integral = cumulative_trapezoid(t, y);
    return std::pow(integral.back(), 1.0 / q);
}

// ---------------------------------------------------------------------------
// CSV emission (fixed column order; see README)

inline std::string csv_header() {
    return "t,mass,grad_sq,pot,E,K,H,variance,momentum,local_variance,local_momentum,"
           "virial_action,virial_action_rate,virial_accel,sup_abs,tail_frac,boundary_frac";
}

inline void write_csv(std::ostream& os, std::span<const DiagnosticSample> series) {
    os << csv_header() << '\n';
    char line[1024];
    for (const auto& s : series) {
        std::snprintf(line, sizeof(line),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                      s.t, s.mass, s.grad_sq, s.pot, s.e, s.k, s.h, s.variance,
                      s.momentum, s.local_variance, s.local_momentum, s.virial_action,
                      s.virial_action_rate, s.virial_accel, s.sup_abs, s.tail_frac,
                      s.boundary_frac);
        os << line << '\n';
    }
}

}  // namespace dnls
