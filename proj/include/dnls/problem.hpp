#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace dnls {

/// Exact fraction p/q for nonlinearity powers given in rational form.
/// Criticality boundaries switch the applicable theory, so boundary
/// comparisons are done in integer arithmetic whenever a fraction is known.
struct Rational {
    long long num = 0;
    long long den = 1;

    static Rational reduce(long long p, long long q) {
        if (q == 0) throw std::invalid_argument("rational with zero denominator");
        if (q < 0) { p = -p; q = -q; }
        const long long g = std::gcd(p < 0 ? -p : p, q);
        return Rational{g ? p / g : p, g ? q / g : q};
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

/// Parse "p/q" or "p".
inline Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos)
            return Rational::reduce(std::stoll(text), 1);
        return Rational::reduce(std::stoll(text.substr(0, slash)),
                                std::stoll(text.substr(slash + 1)));
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed rational '" + text + "'");
    }
}

/// Parameters of  i u_t + Laplacian u + i a u = mu |u|^alpha u  on R^N.
struct ProblemSpec {
    int dimension = 1;                     // N >= 1
    double alpha = 1.0;                    // nonlinearity power, > 0
    std::optional<Rational> alpha_exact;   // engaged when alpha was given as p/q
    int mu = 1;                            // +1 defocusing, -1 focusing
    double damping = 0.0;                  // a >= 0 (a = 0 is the undamped control)

    void validate() const {
        if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
        if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
        if (mu != 1 && mu != -1) throw std::invalid_argument("mu must be +1 or -1");
        if (!(damping >= 0.0)) throw std::invalid_argument("damping must be >= 0");
        if (alpha_exact && alpha_exact->num <= 0)
            throw std::invalid_argument("alpha must be positive");
    }
};

enum class CriticalityClass {
    MassSubcritical,
    MassCritical,
    MassSupercriticalEnergySubcritical,
    EnergyCritical,
    EnergySupercritical,
};

inline const char* to_string(CriticalityClass c) {
    switch (c) {
        case CriticalityClass::MassSubcritical: return "mass-subcritical";
        case CriticalityClass::MassCritical: return "mass-critical";
        case CriticalityClass::MassSupercriticalEnergySubcritical:
            return "mass-supercritical-energy-subcritical";
        case CriticalityClass::EnergyCritical: return "energy-critical";
        case CriticalityClass::EnergySupercritical: return "energy-supercritical";
    }
    return "?";
}

namespace detail {

constexpr double kClassifyTol = 1e-12;

// Sign of alpha*(scale) - 4 against the boundary; exact when a fraction is known.
inline int compare_alpha_boundary(const ProblemSpec& spec, int scale) {
    if (spec.alpha_exact) {
        const long long lhs = spec.alpha_exact->num * scale;
        const long long rhs = 4 * spec.alpha_exact->den;
        return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
    }
    const double lhs = spec.alpha * scale;
    if (std::abs(lhs - 4.0) <= kClassifyTol) return 0;
    return lhs < 4.0 ? -1 : 1;
}

}  // namespace detail

/// alpha* of the energy-critical boundary: 4/(N-2) for N >= 3, infinite below.
inline double alpha_star(int dimension) {
    return dimension >= 3 ? 4.0 / (dimension - 2)
                          : std::numeric_limits<double>::infinity();
}

inline CriticalityClass classify(const ProblemSpec& spec) {
    spec.validate();
    const int mass_cmp = detail::compare_alpha_boundary(spec, spec.dimension);
    if (mass_cmp < 0) return CriticalityClass::MassSubcritical;
    if (mass_cmp == 0) return CriticalityClass::MassCritical;
    if (spec.dimension <= 2) return CriticalityClass::MassSupercriticalEnergySubcritical;
    const int energy_cmp = detail::compare_alpha_boundary(spec, spec.dimension - 2);
    if (energy_cmp < 0) return CriticalityClass::MassSupercriticalEnergySubcritical;
    if (energy_cmp == 0) return CriticalityClass::EnergyCritical;
    return CriticalityClass::EnergySupercritical;
}

inline bool is_mass_critical(const ProblemSpec& spec) {
    return classify(spec) == CriticalityClass::MassCritical;
}

}  // namespace dnls
