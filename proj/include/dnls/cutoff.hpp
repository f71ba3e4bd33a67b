#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dnls/grid.hpp"

namespace dnls {

/// Polynomial in (r - origin) with exact coefficient arithmetic.
struct Polynomial {
    double origin = 0.0;
    std::vector<double> coeffs;  // c0 + c1 s + c2 s^2 + ...

    double eval(double r) const {
        const double s = r - origin;
        double acc = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * s + coeffs[i];
        return acc;
    }

    Polynomial derivative() const {
        Polynomial d;
        d.origin = origin;
        if (coeffs.size() > 1) {
            d.coeffs.resize(coeffs.size() - 1);
            for (std::size_t i = 1; i < coeffs.size(); ++i)
                d.coeffs[i - 1] = coeffs[i] * static_cast<double>(i);
        } else {
            d.coeffs = {0.0};
        }
        return d;
    }

    /// Antiderivative with prescribed value at the piece origin.
    Polynomial antiderivative(double value_at_origin) const {
        Polynomial a;
        a.origin = origin;
        a.coeffs.resize(coeffs.size() + 1);
        a.coeffs[0] = value_at_origin;
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            a.coeffs[i + 1] = coeffs[i] / static_cast<double>(i + 1);
        return a;
    }
};

/// Piecewise polynomial on [0, inf); piece i is valid on [breaks[i], breaks[i+1]),
/// the last piece extends to infinity. Derivatives and antiderivatives are formed
/// symbolically so piece values stay exact.
class PiecewisePolynomial {
public:
    PiecewisePolynomial() = default;
    PiecewisePolynomial(std::vector<double> breaks, std::vector<Polynomial> pieces)
        : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
        if (breaks_.empty() || breaks_.size() != pieces_.size() || breaks_.front() != 0.0)
            throw std::invalid_argument("piecewise polynomial needs pieces from r=0");
    }

    std::size_t piece_index(double r) const {
        std::size_t i = breaks_.size() - 1;
        while (i > 0 && r < breaks_[i]) --i;
        return i;
    }

    double operator()(double r) const {
        if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
        return pieces_[piece_index(r)].eval(r);
    }

    PiecewisePolynomial derivative() const {
        std::vector<Polynomial> d(pieces_.size());
        for (std::size_t i = 0; i < pieces_.size(); ++i) d[i] = pieces_[i].derivative();
        return PiecewisePolynomial(breaks_, std::move(d));
    }

    /// Continuous antiderivative with F(0) = 0.
    PiecewisePolynomial antiderivative() const {
        std::vector<Polynomial> anti(pieces_.size());
        double running = 0.0;
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            anti[i] = pieces_[i].antiderivative(running - pieces_[i].antiderivative(0.0).eval(breaks_[i]));
            if (i + 1 < pieces_.size()) running = anti[i].eval(breaks_[i + 1]);
        }
        return PiecewisePolynomial(breaks_, std::move(anti));
    }

    const std::vector<double>& breakpoints() const { return breaks_; }

private:
    std::vector<double> breaks_;
    std::vector<Polynomial> pieces_;
};

enum class CutoffKind { MassCriticalTheta, GenericTheta };

/// Completion of the mass-critical profile on the interval where only the sign
/// of its slope is constrained; results must not depend on the choice.
enum class ThetaCompletion { CubicHermite, QuinticHermite };

namespace cutoff_detail {

inline double transition_start() { return 1.0 + 1.0 / std::sqrt(3.0); }

/// Profile slope value where the cubic piece levels off: 2 + 4/(3 sqrt(3)).
inline double plateau_value() { return 2.0 + 4.0 / (3.0 * std::sqrt(3.0)); }

/// Slope profile of the mass-critical cutoff:
///   2r on [0,1]; 2[r - (r-1)^3] on (1, r1]; a monotone-decreasing Hermite
///   blend on (r1, 2); 0 beyond. r1 = 1 + 1/sqrt(3) is where the cubic piece
///   has zero slope, so the blend joins C^1 at both ends.
inline PiecewisePolynomial mass_critical_slope(ThetaCompletion completion) {
    const double r1 = transition_start();
    const double v1 = plateau_value();
    const double w = 2.0 - r1;

    Polynomial linear{0.0, {0.0, 2.0}};
    Polynomial cubic{1.0, {2.0, 2.0, 0.0, -2.0}};

    Polynomial blend;
    blend.origin = r1;
    if (completion == ThetaCompletion::CubicHermite) {
        // v1 * (1 - 3 t^2 + 2 t^3), t = (r - r1)/w
        blend.coeffs = {v1, 0.0, -3.0 * v1 / (w * w), 2.0 * v1 / (w * w * w)};
    } else {
        // v1 * (1 - 10 t^3 + 15 t^4 - 6 t^5): zero slope and curvature at both ends
        const double w3 = w * w * w;
        blend.coeffs = {v1, 0.0, 0.0, -10.0 * v1 / w3, 15.0 * v1 / (w3 * w), -6.0 * v1 / (w3 * w * w)};
    }

    Polynomial zero{2.0, {0.0}};
    return PiecewisePolynomial({0.0, 1.0, r1, 2.0},
                               {linear, cubic, blend, zero});
}

/// Slope of the generic profile: theta(r) = r^2 on [0,1], constant 2 beyond 2,
/// curvature bounded by 2 throughout. The middle piece is the Hermite bridge
/// theta = 1 + 2(r-1) - (r-1)^2, i.e. slope 2 - 2(r-1).
inline PiecewisePolynomial generic_slope() {
    Polynomial linear{0.0, {0.0, 2.0}};
    Polynomial down{1.0, {2.0, -2.0}};
    Polynomial zero{2.0, {0.0}};
    return PiecewisePolynomial({0.0, 1.0, 2.0}, {linear, down, zero});
}

}  // namespace cutoff_detail

/// Slope profile of the mass-critical cutoff (per-unit radius scale).
inline double vartheta(double r) {
    static const PiecewisePolynomial p =
        cutoff_detail::mass_critical_slope(ThetaCompletion::CubicHermite);
    return p(r);
}

/// Integrated profile theta(r); the generic kind equals r^2 on [0,1] and 2 beyond 2.
inline double theta(double r, CutoffKind kind) {
    static const PiecewisePolynomial mass =
        cutoff_detail::mass_critical_slope(ThetaCompletion::CubicHermite).antiderivative();
    static const PiecewisePolynomial generic = cutoff_detail::generic_slope().antiderivative();
    return kind == CutoffKind::MassCriticalTheta ? mass(r) : generic(r);
}

/// chi_R and its radial derivatives at one radius, together with the
/// curvature deficits chi1 = 2 - chi'', chi2 = 2N - Laplacian(chi).
struct CutoffEvaluation {
    double chi = 0.0;
    double chi_p = 0.0;        // d chi / dr
    double chi_pp = 0.0;       // d^2 chi / dr^2
    double laplacian = 0.0;    // chi'' + (N-1) chi'/r
    double bilaplacian = 0.0;  // radial Laplacian applied twice
    double chi1 = 0.0;
    double chi2 = 0.0;
};

struct PositivityReport {
    double min_margin = 0.0;
    double worst_radius = 0.0;
    bool nonnegative = true;
};

/// Radial weight chi_R(r) = R^2 theta(r/R). Equals r^2 inside radius R and is
/// constant beyond 2R, which is what makes the localized virial machinery work.
class RadialCutoff {
public:
    RadialCutoff(double radius, CutoffKind kind,
                 ThetaCompletion completion = ThetaCompletion::CubicHermite)
        : radius_(radius), kind_(kind), completion_(completion) {
        if (!(radius > 0.0)) throw std::invalid_argument("cutoff radius must be positive");
        PiecewisePolynomial slope =
            kind == CutoffKind::MassCriticalTheta
                ? cutoff_detail::mass_critical_slope(completion)
                : cutoff_detail::generic_slope();
        theta_ = slope.antiderivative();
        d1_ = slope;
        d2_ = d1_.derivative();
        d3_ = d2_.derivative();
        d4_ = d3_.derivative();
    }

    double radius() const { return radius_; }
    CutoffKind kind() const { return kind_; }
    ThetaCompletion completion() const { return completion_; }

    double chi(double r) const { return radius_ * radius_ * theta_(r / radius_); }
    double chi_derivative(double r) const { return radius_ * d1_(r / radius_); }

    CutoffEvaluation evaluate(double r, int dimension) const {
        if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
        if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
        const double N = dimension;
        CutoffEvaluation out;
        const double rho = r / radius_;
        if (rho <= 1.0) {
            // chi = r^2 exactly here; evaluate directly so the deficits vanish
            // identically and no 1/r powers are formed near the origin.
            out.chi = r * r;
            out.chi_p = 2.0 * r;
            out.chi_pp = 2.0;
            out.laplacian = 2.0 * N;
            out.bilaplacian = 0.0;
            out.chi1 = 0.0;
            out.chi2 = 0.0;
            return out;
        }
        out.chi = radius_ * radius_ * theta_(rho);
        out.chi_p = radius_ * d1_(rho);
        out.chi_pp = d2_(rho);
        const double d3 = d3_(rho) / radius_;
        const double d4 = d4_(rho) / (radius_ * radius_);
        out.laplacian = out.chi_pp + (N - 1.0) * out.chi_p / r;
        out.bilaplacian = d4 + 2.0 * (N - 1.0) * d3 / r +
                          (N - 1.0) * (N - 3.0) * (out.chi_pp / (r * r) - out.chi_p / (r * r * r));
        out.chi1 = 2.0 - out.chi_pp;
        out.chi2 = 2.0 * N - out.laplacian;
        return out;
    }

    /// Scaled breakpoints of the underlying profile, ascending.
    std::vector<double> piece_radii() const {
        std::vector<double> out;
        for (double b : theta_.breakpoints()) out.push_back(b * radius_);
        return out;
    }

private:
    double radius_;
    CutoffKind kind_;
    ThetaCompletion completion_;
    PiecewisePolynomial theta_, d1_, d2_, d3_, d4_;
};

/// Samples chi1 - C eps chi2^{N/2} on [0, 4R] plus the piece boundaries and
/// reports the minimum. A negative margin is a report, not a failure.
inline PositivityReport verify_positivity(const RadialCutoff& cutoff, int dimension,
                                          double eps, double constant = 1.0,
                                          int sample_count = 4096) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (sample_count < 2) throw std::invalid_argument("need at least two samples");
    std::vector<double> radii;
    radii.reserve(sample_count + 16);
    const double r_max = 4.0 * cutoff.radius();
    for (int i = 0; i < sample_count; ++i)
        radii.push_back(r_max * i / (sample_count - 1));
    for (double b : cutoff.piece_radii()) {
        radii.push_back(b);
        radii.push_back(std::max(0.0, b - 1e-9 * cutoff.radius()));
        radii.push_back(b + 1e-9 * cutoff.radius());
    }

    PositivityReport report;
    report.min_margin = std::numeric_limits<double>::infinity();
    const double half_n = 0.5 * dimension;
    for (double r : radii) {
        const auto ev = cutoff.evaluate(r, dimension);
        const double margin =
            ev.chi1 - constant * eps * std::pow(std::max(ev.chi2, 0.0), half_n);
        if (margin < report.min_margin) {
            report.min_margin = margin;
            report.worst_radius = r;
        }
    }
    report.nonnegative = report.min_margin >= -1e-12;
    return report;
}

}  // namespace dnls
