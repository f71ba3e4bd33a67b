#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dnls/diagnostics.hpp"
#include "dnls/fft.hpp"
#include "dnls/field.hpp"
#include "dnls/problem.hpp"
#include "dnls/transforms.hpp"

namespace dnls {

struct SolverConfig {
    double dt_init = 1e-3;
    double dt_min = 1e-9;
    double t_final = 1.0;
    bool adapt = false;
    double blowup_grad_factor = 1e4;  // growth ratio that counts as collapse
    double tail_threshold = 1e-6;     // spectral tail fraction that counts as lost
    int sample_stride = 10;           // diagnostics cadence in steps
    int detect_stride = 1;            // detection cadence in steps
    bool linear_only = false;         // drop the nonlinear substep

    void validate() const {
        if (!(dt_init > 0.0) || !(dt_min > 0.0) || !(t_final > 0.0))
            throw std::invalid_argument("solver times must be positive");
        if (dt_min > dt_init)
            throw std::invalid_argument("dt_min must not exceed dt_init");
        if (!(blowup_grad_factor > 0.0) || !(tail_threshold > 0.0))
            throw std::invalid_argument("solver thresholds must be positive");
        if (sample_stride < 1 || detect_stride < 1)
            throw std::invalid_argument("strides must be >= 1");
    }
};

enum class OutcomeKind { Global, BlowUp, ResolutionLoss };
enum class BlowupReason { GradientGrowth, AmplitudeGrowth };

inline const char* to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Global: return "global";
        case OutcomeKind::BlowUp: return "blow-up-detected";
        case OutcomeKind::ResolutionLoss: return "resolution-loss";
    }
    return "?";
}

inline const char* to_string(BlowupReason r) {
    return r == BlowupReason::GradientGrowth ? "gradient-growth" : "amplitude-growth";
}

/// Classification of one run with its evidence series. Timestamps of the
/// series are strictly increasing; final_sample duplicates series.back().
struct RunOutcome {
    OutcomeKind kind = OutcomeKind::Global;
    double t_end = 0.0;
    std::optional<BlowupReason> reason;
    double tail_at_end = 0.0;
    double max_boundary_fraction = 0.0;
    DiagnosticSample final_sample;
    std::vector<DiagnosticSample> series;
};

using SnapshotSink = std::function<void(const Field&)>;

namespace detail {

inline double pow_half(double mod2, double half_exponent) {
    if (half_exponent == 2.0) return mod2 * mod2;
    if (half_exponent == 1.0) return mod2;
    if (half_exponent == 0.5) return std::sqrt(mod2);
    if (half_exponent == 1.5) return mod2 * std::sqrt(mod2);
    if (half_exponent == 3.0) return mod2 * mod2 * mod2;
    return std::pow(mod2, half_exponent);
}

/// Half-step of the nonlinear flow: u <- u exp(-i mu |u|^alpha dt/2). The
/// substep ODE preserves |u| pointwise, so freezing |u| makes it exact.
inline void nonlinear_half_step(std::vector<cplx>& values, double mu, double alpha,
                                double dt) {
    const double half_alpha = 0.5 * alpha;
    const double coeff = -mu * 0.5 * dt;
    for (auto& z : values) {
        const double phase = coeff * pow_half(std::norm(z), half_alpha);
        z *= cplx(std::cos(phase), std::sin(phase));
    }
}

/// Per-axis factors of the exact linear multiplier exp((-i|k|^2 - a) dt);
/// the damping is folded into axis 0 so one complex product per mode remains.
struct LinearMultiplier {
    double dt = -1.0;
    double damping = -1.0;
    std::array<std::vector<cplx>, 3> axis;

    void refresh(const Grid& g, double new_dt, double a) {
        if (new_dt == dt && a == damping) return;
        dt = new_dt;
        damping = a;
        const int n = g.points_per_axis();
        const double decay = std::exp(-a * dt);
        for (int ax = 0; ax < g.dim(); ++ax) {
            axis[ax].resize(n);
            for (int m = 0; m < n; ++m) {
                const double k = g.wavenumber(m);
                const double phase = -k * k * dt;
                cplx f(std::cos(phase), std::sin(phase));
                if (ax == 0) f *= decay;
                axis[ax][m] = f;
            }
        }
    }

    void apply(const Grid& g, std::vector<cplx>& hat) const {
        for (std::size_t p = 0; p < hat.size(); ++p) {
            const auto idx = g.unflatten(p);
            cplx f = axis[0][idx[0]];
            for (int ax = 1; ax < g.dim(); ++ax) f *= axis[ax][idx[ax]];
            hat[p] *= f;
        }
    }
};

inline void strang_step_inplace(Field& u, double dt, const ProblemSpec& spec,
                                SpectralWorkspace& ws, LinearMultiplier& mult,
                                bool linear_only) {
    if (!linear_only) nonlinear_half_step(u.values, spec.mu, spec.alpha, dt);
    ws.forward(u.values);
    mult.refresh(u.grid, dt, spec.damping);
    mult.apply(u.grid, u.values);
    ws.backward(u.values);
    if (!linear_only) nonlinear_half_step(u.values, spec.mu, spec.alpha, dt);
    u.time += dt;
}

struct SpectralStats {
    double grad_norm = 0.0;
    double tail_frac = 0.0;
};

inline SpectralStats spectral_stats(const Field& u, SpectralWorkspace& ws) {
    std::vector<cplx> hat = u.values;
    ws.forward(hat);
    SpectralStats s;
    s.grad_norm = std::sqrt(modes_weighted_sum_ksq(u.grid, hat) * u.grid.cell_volume() /
                            static_cast<double>(u.grid.size()));
    s.tail_frac = tail_fraction_of_spectrum(u.grid, hat);
    return s;
}

}  // namespace detail

/// One Strang step: exact half nonlinear substep, exact linear substep in
/// spectral space (dispersion and damping together), exact half nonlinear
/// substep. Second-order accurate overall.
inline Field strang_step(const Field& u, double dt, const ProblemSpec& spec,
                         SpectralWorkspace& ws, bool linear_only = false) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    Field out = u;
    detail::LinearMultiplier mult;
    detail::strang_step_inplace(out, dt, spec, ws, mult, linear_only);
    if (!all_finite(out))
        throw std::runtime_error("strang_step produced non-finite values");
    return out;
}

/// Collapse proxy: gradient norm or amplitude grown past cfg.blowup_grad_factor
/// relative to the reference state. Resolution loss is a separate channel
/// handled by run() via the spectral tail.
inline std::optional<BlowupReason> detect_blowup(const Field& u, const Field& reference,
                                                 const SolverConfig& cfg,
                                                 SpectralWorkspace& ws) {
    const auto base = detail::spectral_stats(reference, ws);
    const auto now = detail::spectral_stats(u, ws);
    if (base.grad_norm > 0.0 && now.grad_norm > cfg.blowup_grad_factor * base.grad_norm)
        return BlowupReason::GradientGrowth;
    const double sup0 = sup_abs(reference);
    if (sup0 > 0.0 && sup_abs(u) > cfg.blowup_grad_factor * sup0)
        return BlowupReason::AmplitudeGrowth;
    return std::nullopt;
}

/// Amplitude-driven step control: dt = dt_init / (1 + (max|u|/max|u0|)^alpha),
/// clamped to [dt_min, dt_init]. Monotone decreasing in the amplitude ratio.
inline double adapt_dt(const Field& u, const SolverConfig& cfg, const ProblemSpec& spec,
                       double sup_reference) {
    const double ratio = sup_reference > 0.0 ? sup_abs(u) / sup_reference : 1.0;
    const double raw = cfg.dt_init / (1.0 + std::pow(ratio, spec.alpha));
    return std::clamp(raw, cfg.dt_min, cfg.dt_init);
}

/// Integrates the damped equation from u0 until t_final or until detection.
/// Deterministic given inputs. Samples are recorded every sample_stride steps
/// plus the initial and final instants; `sink`, when set, receives the field
/// at every recorded sample.
inline RunOutcome run(const Field& u0, const ProblemSpec& spec, const SolverConfig& cfg,
                      const RadialCutoff* cutoff = nullptr, const SnapshotSink& sink = {}) {
    spec.validate();
    cfg.validate();
    SpectralWorkspace ws(u0.grid);
    detail::LinearMultiplier mult;

    Field u = u0;
    u.time = 0.0;

    RunOutcome out;
    out.series.push_back(sample(u, spec, cutoff, ws));
    out.max_boundary_fraction = out.series.back().boundary_frac;
    if (sink) sink(u);

    const auto base = detail::spectral_stats(u, ws);
    const double sup0 = sup_abs(u);

    const double t_eps = 1e-12 * std::max(1.0, cfg.t_final);
    long step_index = 0;
    bool finished = false;

    while (!finished) {
        const double remaining = cfg.t_final - u.time;
        if (remaining <= t_eps) break;

        bool lost = false;
        double taken_dt = cfg.dt_init;
        if (cfg.adapt) {
            const double ratio = sup0 > 0.0 ? sup_abs(u) / sup0 : 1.0;
            const double raw = cfg.dt_init / (1.0 + std::pow(ratio, spec.alpha));
            if (raw < cfg.dt_min) {
                out.kind = OutcomeKind::ResolutionLoss;  // dt underflow
                out.tail_at_end = detail::spectral_stats(u, ws).tail_frac;
                lost = true;
            }
            taken_dt = std::clamp(raw, cfg.dt_min, cfg.dt_init);
        }
        if (lost) break;
        taken_dt = std::min(taken_dt, remaining);

        detail::strang_step_inplace(u, taken_dt, spec, ws, mult, cfg.linear_only);
        ++step_index;
        finished = (cfg.t_final - u.time) <= t_eps;

        if (!all_finite(u)) {
            out.kind = OutcomeKind::ResolutionLoss;
            out.tail_at_end = std::numeric_limits<double>::quiet_NaN();
            break;
        }

        bool terminating = false;
        if (step_index % cfg.detect_stride == 0 || finished) {
            const auto stats = detail::spectral_stats(u, ws);
            if (stats.tail_frac > cfg.tail_threshold) {
                out.kind = OutcomeKind::ResolutionLoss;
                out.tail_at_end = stats.tail_frac;
                terminating = true;
            } else if (base.grad_norm > 0.0 &&
                       stats.grad_norm > cfg.blowup_grad_factor * base.grad_norm) {
                out.kind = OutcomeKind::BlowUp;
                out.reason = BlowupReason::GradientGrowth;
                terminating = true;
            } else if (sup0 > 0.0 && sup_abs(u) > cfg.blowup_grad_factor * sup0) {
                out.kind = OutcomeKind::BlowUp;
                out.reason = BlowupReason::AmplitudeGrowth;
                terminating = true;
            }
        }

        if (terminating || finished || step_index % cfg.sample_stride == 0) {
            out.series.push_back(sample(u, spec, cutoff, ws));
            out.max_boundary_fraction =
                std::max(out.max_boundary_fraction, out.series.back().boundary_frac);
            if (sink) sink(u);
        }
        if (terminating) break;
    }

    out.t_end = u.time;
    if (out.series.empty() || out.series.back().t != u.time) {
        out.series.push_back(sample(u, spec, cutoff, ws));
        if (sink) sink(u);
    }
    out.final_sample = out.series.back();
    return out;
}

}  // namespace dnls
