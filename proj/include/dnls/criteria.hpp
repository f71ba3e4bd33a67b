#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "dnls/problem.hpp"

namespace dnls {

enum class BlowupBranch {
    None,
    NegativeEnergy,
    ZeroEnergyNegativeMomentum,
    PositiveEnergyDiscriminant,
};

inline const char* to_string(BlowupBranch b) {
    switch (b) {
        case BlowupBranch::None: return "none";
        case BlowupBranch::NegativeEnergy: return "negative-energy";
        case BlowupBranch::ZeroEnergyNegativeMomentum: return "zero-energy-negative-momentum";
        case BlowupBranch::PositiveEnergyDiscriminant: return "positive-energy-discriminant";
    }
    return "?";
}

/// Which radial blow-up criterion is being queried; they differ in the
/// admissible (N, alpha) range and in the discriminant coefficient.
enum class RadialRegime { MassCritical, Supercritical, EnergyCritical };

inline const char* to_string(RadialRegime r) {
    switch (r) {
        case RadialRegime::MassCritical: return "mass-critical";
        case RadialRegime::Supercritical: return "supercritical";
        case RadialRegime::EnergyCritical: return "energy-critical";
    }
    return "?";
}

struct CriterionVerdict {
    bool applicable = false;
    BlowupBranch branch = BlowupBranch::None;
    bool predicted_blowup = false;
    std::optional<double> t_star;      // first negativity time of the governing quadratic
    std::optional<double> delta_used;  // margin parameter of the radial zero/positive branches
    bool boundary_case = false;        // discriminant zero to rounding: not predicted
};

/// Smallest t > 0 with c0 + c1 t + c2 t^2 < 0 (the crossing point; returns 0
/// when the quadratic is already negative arbitrarily close to 0). Empty when
/// the quadratic never goes negative on t > 0.
inline std::optional<double> negativity_time(double c0, double c1, double c2) {
    if (c0 < 0.0) return 0.0;
    if (c2 == 0.0) {
        if (c1 >= 0.0) return std::nullopt;  // nondecreasing from c0 >= 0
        return -c0 / c1;
    }
    const double disc = c1 * c1 - 4.0 * c0 * c2;
    if (c2 < 0.0) {
        // Downward parabola: f < 0 beyond the larger root (disc >= c1^2 here).
        const double s = std::sqrt(std::max(disc, 0.0));
        return (c1 + s) / (-2.0 * c2);
    }
    // Upward parabola: negative only between real roots.
    if (disc <= 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    // Stable smaller/larger root pair.
    const double q = -0.5 * (c1 + (c1 >= 0.0 ? s : -s));
    double r1 = q / c2, r2 = (q != 0.0) ? c0 / q : 0.0;
    if (r1 > r2) std::swap(r1, r2);
    if (r2 <= 0.0) return std::nullopt;
    return std::max(r1, 0.0);
}

namespace detail {

constexpr double kDiscriminantTol = 1e-12;

enum class DiscSign { Negative, Boundary, Positive };

/// Sign of mom^2 - coeff * e * var with a relative rounding band.
inline DiscSign discriminant_sign(double mom, double e, double var, double coeff) {
    const double disc = mom * mom - coeff * e * var;
    const double scale = std::max({mom * mom, coeff * e * var, 1.0});
    if (disc > kDiscriminantTol * scale) return DiscSign::Positive;
    if (disc > -kDiscriminantTol * scale) return DiscSign::Boundary;
    return DiscSign::Negative;
}

}  // namespace detail

/// Blow-up criterion for finite-variance data: one of
///   E < 0;  E = 0 and V < 0;  E > 0 and V + sqrt(2 E I) < 0.
/// t_star is the first negativity time of f(t) = I + 4 V t + 8 E t^2
/// (for E = 0 this degenerates to -I/(4V)).
inline CriterionVerdict sigma_criterion(double e, double v, double i) {
    if (!(i >= 0.0)) throw std::invalid_argument("variance I must be nonnegative");
    CriterionVerdict verdict;
    verdict.applicable = true;
    if (e < 0.0) {
        verdict.branch = BlowupBranch::NegativeEnergy;
        verdict.predicted_blowup = true;
        verdict.t_star = negativity_time(i, 4.0 * v, 8.0 * e);
        return verdict;
    }
    if (e == 0.0) {
        if (v < 0.0) {
            verdict.branch = BlowupBranch::ZeroEnergyNegativeMomentum;
            verdict.predicted_blowup = true;
            verdict.t_star = negativity_time(i, 4.0 * v, 0.0);
        }
        return verdict;
    }
    if (v < 0.0) {
        switch (detail::discriminant_sign(v, e, i, 2.0)) {
            case detail::DiscSign::Positive:
                verdict.branch = BlowupBranch::PositiveEnergyDiscriminant;
                verdict.predicted_blowup = true;
                verdict.t_star = negativity_time(i, 4.0 * v, 8.0 * e);
                break;
            case detail::DiscSign::Boundary:
                verdict.boundary_case = true;  // strict inequality required
                break;
            case detail::DiscSign::Negative:
                break;
        }
    }
    return verdict;
}

/// Same data condition, gated by the hypotheses under which it applies:
/// focusing, and mass-critical or above (up to energy-critical).
inline CriterionVerdict sigma_criterion(double e, double v, double i,
                                        const ProblemSpec& spec) {
    const auto cls = classify(spec);
    const bool class_ok = cls == CriticalityClass::MassCritical ||
                          cls == CriticalityClass::MassSupercriticalEnergySubcritical ||
                          cls == CriticalityClass::EnergyCritical;
    if (spec.mu != -1 || !class_ok) return CriterionVerdict{};
    return sigma_criterion(e, v, i);
}

/// Discriminant coefficient of the radial criteria: 8 (mass-critical),
/// 2 N alpha (supercritical), 8N/(N-2) (energy-critical).
inline double radial_discriminant_coefficient(const ProblemSpec& spec, RadialRegime regime) {
    switch (regime) {
        case RadialRegime::MassCritical: return 8.0;
        case RadialRegime::Supercritical: return 2.0 * spec.dimension * spec.alpha;
        case RadialRegime::EnergyCritical:
            return 8.0 * spec.dimension / (spec.dimension - 2.0);
    }
    return 0.0;
}

namespace detail {

inline bool radial_regime_applicable(const ProblemSpec& spec, RadialRegime regime) {
    const int N = spec.dimension;
    const auto cls = classify(spec);
    switch (regime) {
        case RadialRegime::MassCritical:
            return N >= 2 && cls == CriticalityClass::MassCritical;
        case RadialRegime::Supercritical:
            if (N >= 3) return cls == CriticalityClass::MassSupercriticalEnergySubcritical;
            if (N == 2)
                // 2 < alpha <= 4 in two dimensions (the Young-inequality cap).
                return cls == CriticalityClass::MassSupercriticalEnergySubcritical &&
                       spec.alpha <= 4.0 + 1e-12;
            return false;
        case RadialRegime::EnergyCritical:
            return N >= 3 && cls == CriticalityClass::EnergyCritical;
    }
    return false;
}

/// E < 0 quadratic coefficient per regime: the respective proofs keep
/// 6E (mass-critical), N alpha E (supercritical), 4N/(N-2) E (energy-critical)
/// in front of t^2 after absorbing the localization remainder.
inline double radial_negative_coeff(const ProblemSpec& spec, RadialRegime regime) {
    switch (regime) {
        case RadialRegime::MassCritical: return 6.0;
        case RadialRegime::Supercritical: return spec.dimension * spec.alpha;
        case RadialRegime::EnergyCritical:
            return 4.0 * spec.dimension / (spec.dimension - 2.0);
    }
    return 0.0;
}

}  // namespace detail

/// Radial analogue of the data condition with J, W in place of I, V:
///   E < 0;  E = 0 and W < 0;  E > 0 and W + sqrt(c E J) < 0,
/// where c = radial_discriminant_coefficient. Applicability is gated by the
/// (N, alpha) range of the regime, the focusing sign, and the symmetry flag.
/// The governing quadratics are
///   E < 0: J + 2 W t + coeff(regime) E t^2,
///   E = 0: J + 2 W t + delta t^2         with delta = min(1, W^2/J)/2,
///   E > 0: J + 2 W t + c (1+delta) E t^2 with delta = min(1, (W^2/(cEJ)-1)/2),
/// delta chosen so the strict inequalities hold with a quantifiable margin.
inline CriterionVerdict radial_criterion(double e, double w, double j,
                                         const ProblemSpec& spec, RadialRegime regime,
                                         bool radial_data) {
    if (!(j >= 0.0)) throw std::invalid_argument("localized variance J must be nonnegative");
    if (spec.mu != -1 || !radial_data || !detail::radial_regime_applicable(spec, regime))
        return CriterionVerdict{};
    CriterionVerdict verdict;
    verdict.applicable = true;
    const double c = radial_discriminant_coefficient(spec, regime);
    if (e < 0.0) {
        verdict.branch = BlowupBranch::NegativeEnergy;
        verdict.predicted_blowup = true;
        verdict.t_star = negativity_time(j, 2.0 * w, detail::radial_negative_coeff(spec, regime) * e);
        return verdict;
    }
    if (e == 0.0) {
        if (w < 0.0) {
            verdict.branch = BlowupBranch::ZeroEnergyNegativeMomentum;
            verdict.predicted_blowup = true;
            const double delta = 0.5 * std::min(1.0, j > 0.0 ? w * w / j : 1.0);
            verdict.delta_used = delta;
            verdict.t_star = negativity_time(j, 2.0 * w, delta);
        }
        return verdict;
    }
    if (w < 0.0) {
        switch (detail::discriminant_sign(w, e, j, c)) {
            case detail::DiscSign::Positive: {
                verdict.branch = BlowupBranch::PositiveEnergyDiscriminant;
                verdict.predicted_blowup = true;
                const double denom = c * e * j;
                const double delta =
                    std::min(1.0, denom > 0.0 ? 0.5 * (w * w / denom - 1.0) : 1.0);
                verdict.delta_used = delta;
                verdict.t_star = negativity_time(j, 2.0 * w, c * (1.0 + delta) * e);
                break;
            }
            case detail::DiscSign::Boundary:
                verdict.boundary_case = true;
                break;
            case detail::DiscSign::Negative:
                break;
        }
    }
    return verdict;
}

}  // namespace dnls
