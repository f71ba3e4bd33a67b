#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dnls/criteria.hpp"
#include "dnls/cutoff.hpp"
#include "dnls/diagnostics.hpp"
#include "dnls/field.hpp"
#include "dnls/problem.hpp"
#include "dnls/snapshot.hpp"
#include "dnls/solver.hpp"
#include "dnls/transforms.hpp"

namespace dnls {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// run configuration

struct InitialData {
    std::string type = "gaussian";
    double amplitude = 1.0;
    double width = 1.0;
    double chirp = 0.0;
};

struct CutoffConfig {
    double radius = 8.0;
    CutoffKind kind = CutoffKind::MassCriticalTheta;
    ThetaCompletion completion = ThetaCompletion::CubicHermite;
};

enum class Scenario { Simulate, VerifyIdentities, CriteriaVsOutcome, Threshold, ScatterProbe };

struct IdentityTolerances {
    double mass = 1e-10;
    double energy = 1e-4;
    double virial = 1e-3;
    double sigma = 1e-3;
};

struct RunConfig {
    ProblemSpec problem;
    double grid_extent = 32.0;
    int grid_points = 256;
    InitialData initial;
    SolverConfig solver;
    std::optional<CutoffConfig> cutoff;
    Scenario scenario = Scenario::Simulate;
    std::string output_dir = "out";
    IdentityTolerances tolerances;
    std::vector<InitialData> family;       // criteria-vs-outcome data family
    std::vector<double> damping_list;      // criteria-vs-outcome damping sweep
    bool save_snapshots = false;
};

inline const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::Simulate: return "simulate";
        case Scenario::VerifyIdentities: return "verify-identities";
        case Scenario::CriteriaVsOutcome: return "criteria-vs-outcome";
        case Scenario::Threshold: return "threshold";
        case Scenario::ScatterProbe: return "scatter-probe";
    }
    return "?";
}

namespace detail {

inline Scenario scenario_from_string(const std::string& s) {
    if (s == "simulate") return Scenario::Simulate;
    if (s == "verify-identities") return Scenario::VerifyIdentities;
    if (s == "criteria-vs-outcome") return Scenario::CriteriaVsOutcome;
    if (s == "threshold") return Scenario::Threshold;
    if (s == "scatter-probe") return Scenario::ScatterProbe;
    throw std::invalid_argument("unknown scenario '" + s + "'");
}

inline CutoffKind cutoff_kind_from_string(const std::string& s) {
    if (s == "mass-critical") return CutoffKind::MassCriticalTheta;
    if (s == "generic") return CutoffKind::GenericTheta;
    throw std::invalid_argument("unknown cutoff kind '" + s + "'");
}

inline ThetaCompletion completion_from_string(const std::string& s) {
    if (s == "cubic") return ThetaCompletion::CubicHermite;
    if (s == "quintic") return ThetaCompletion::QuinticHermite;
    throw std::invalid_argument("unknown cutoff completion '" + s + "'");
}

inline const char* to_string(CutoffKind k) {
    return k == CutoffKind::MassCriticalTheta ? "mass-critical" : "generic";
}

inline const char* to_string(ThetaCompletion c) {
    return c == ThetaCompletion::CubicHermite ? "cubic" : "quintic";
}

}  // namespace detail

inline json to_json(const InitialData& d) {
    return json{{"type", d.type},
                {"amplitude", d.amplitude},
                {"width", d.width},
                {"chirp", d.chirp}};
}

inline InitialData initial_from_json(const json& j) {
    InitialData d;
    d.type = j.value("type", std::string("gaussian"));
    if (d.type != "gaussian")
        throw std::invalid_argument("unsupported initial data type '" + d.type + "'");
    d.amplitude = j.at("amplitude").get<double>();
    d.width = j.at("width").get<double>();
    d.chirp = j.value("chirp", 0.0);
    return d;
}

inline json to_json(const RunConfig& cfg) {
    json problem{{"dimension", cfg.problem.dimension},
                 {"mu", cfg.problem.mu},
                 {"damping", cfg.problem.damping}};
    if (cfg.problem.alpha_exact) {
        problem["alpha"] = std::to_string(cfg.problem.alpha_exact->num) + "/" +
                           std::to_string(cfg.problem.alpha_exact->den);
    } else {
        problem["alpha"] = cfg.problem.alpha;
    }
    json j{{"problem", problem},
           {"grid", json{{"extent", cfg.grid_extent}, {"points", cfg.grid_points}}},
           {"initial", to_json(cfg.initial)},
           {"solver", json{{"dt_init", cfg.solver.dt_init},
                           {"dt_min", cfg.solver.dt_min},
                           {"t_final", cfg.solver.t_final},
                           {"adapt", cfg.solver.adapt},
                           {"blowup_grad_factor", cfg.solver.blowup_grad_factor},
                           {"tail_threshold", cfg.solver.tail_threshold},
                           {"sample_stride", cfg.solver.sample_stride},
                           {"detect_stride", cfg.solver.detect_stride},
                           {"linear_only", cfg.solver.linear_only}}},
           {"scenario", to_string(cfg.scenario)},
           {"output_dir", cfg.output_dir},
           {"save_snapshots", cfg.save_snapshots},
           {"tolerances", json{{"mass", cfg.tolerances.mass},
                               {"energy", cfg.tolerances.energy},
                               {"virial", cfg.tolerances.virial},
                               {"sigma", cfg.tolerances.sigma}}}};
    if (cfg.cutoff) {
        j["cutoff"] = json{{"radius", cfg.cutoff->radius},
                           {"kind", detail::to_string(cfg.cutoff->kind)},
                           {"completion", detail::to_string(cfg.cutoff->completion)}};
    }
    if (!cfg.family.empty()) {
        json fam = json::array();
        for (const auto& d : cfg.family) fam.push_back(to_json(d));
        j["family"] = fam;
        j["damping_list"] = cfg.damping_list;
    }
    return j;
}

inline RunConfig config_from_json(const json& j) {
    RunConfig cfg;
    const auto& p = j.at("problem");
    cfg.problem.dimension = p.at("dimension").get<int>();
    if (p.at("alpha").is_string()) {
        cfg.problem.alpha_exact = parse_rational(p.at("alpha").get<std::string>());
        cfg.problem.alpha = cfg.problem.alpha_exact->value();
    } else {
        cfg.problem.alpha = p.at("alpha").get<double>();
    }
    cfg.problem.mu = p.at("mu").get<int>();
    cfg.problem.damping = p.at("damping").get<double>();
    cfg.problem.validate();

    const auto& g = j.at("grid");
    cfg.grid_extent = g.at("extent").get<double>();
    cfg.grid_points = g.at("points").get<int>();

    cfg.initial = initial_from_json(j.at("initial"));

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        cfg.solver.dt_init = s.value("dt_init", cfg.solver.dt_init);
        cfg.solver.dt_min = s.value("dt_min", cfg.solver.dt_min);
        cfg.solver.t_final = s.value("t_final", cfg.solver.t_final);
        cfg.solver.adapt = s.value("adapt", cfg.solver.adapt);
        cfg.solver.blowup_grad_factor =
            s.value("blowup_grad_factor", cfg.solver.blowup_grad_factor);
        cfg.solver.tail_threshold = s.value("tail_threshold", cfg.solver.tail_threshold);
        cfg.solver.sample_stride = s.value("sample_stride", cfg.solver.sample_stride);
        cfg.solver.detect_stride = s.value("detect_stride", cfg.solver.detect_stride);
        cfg.solver.linear_only = s.value("linear_only", cfg.solver.linear_only);
        cfg.solver.validate();
    }

    if (j.contains("cutoff")) {
        const auto& c = j.at("cutoff");
        CutoffConfig cc;
        cc.radius = c.at("radius").get<double>();
        cc.kind = detail::cutoff_kind_from_string(c.value("kind", std::string("mass-critical")));
        cc.completion = detail::completion_from_string(c.value("completion", std::string("cubic")));
        cfg.cutoff = cc;
    }

    cfg.scenario = detail::scenario_from_string(j.value("scenario", std::string("simulate")));
    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.save_snapshots = j.value("save_snapshots", false);

    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        cfg.tolerances.mass = t.value("mass", cfg.tolerances.mass);
        cfg.tolerances.energy = t.value("energy", cfg.tolerances.energy);
        cfg.tolerances.virial = t.value("virial", cfg.tolerances.virial);
        cfg.tolerances.sigma = t.value("sigma", cfg.tolerances.sigma);
    }

    if (j.contains("family")) {
        for (const auto& d : j.at("family")) cfg.family.push_back(initial_from_json(d));
        cfg.damping_list = j.at("damping_list").get<std::vector<double>>();
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config " + path.string());
    json j;
    is >> j;
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// shared builders

inline Grid build_grid(const RunConfig& cfg) {
    // Radial theorems are exercised with the computational dimension equal to
    // the problem dimension (N <= 3 at desk scale).
    return Grid::make(cfg.grid_extent, cfg.grid_points, cfg.problem.dimension);
}

inline Field build_initial(const RunConfig& cfg, const InitialData& data) {
    if (data.type != "gaussian")
        throw std::invalid_argument("unsupported initial data type");
    return gaussian_data(build_grid(cfg), data.amplitude, data.width, data.chirp);
}

inline Field build_initial(const RunConfig& cfg) { return build_initial(cfg, cfg.initial); }

inline std::optional<RadialCutoff> build_cutoff(const RunConfig& cfg) {
    if (!cfg.cutoff) return std::nullopt;
    return RadialCutoff(cfg.cutoff->radius, cfg.cutoff->kind, cfg.cutoff->completion);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Content address of a configuration: hash of its canonical JSON dump
/// (object keys are emitted in sorted order).
inline std::string config_hash(const RunConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json(cfg).dump())));
    return std::string(buf);
}

inline int worker_count() {
    const char* env = std::getenv("DNLS_WORKERS");
    if (!env) return 1;
    const int w = std::atoi(env);
    return w < 1 ? 1 : w;
}

namespace detail {

/// Runs jobs with at most `workers` concurrent; results land by index, so the
/// aggregate is order-independent.
inline void run_jobs(std::vector<std::function<void()>>& jobs, int workers) {
    if (workers <= 1) {
        for (auto& j : jobs) j();
        return;
    }
    std::size_t next = 0;
    while (next < jobs.size()) {
        std::vector<std::future<void>> wave;
        for (int w = 0; w < workers && next < jobs.size(); ++w, ++next)
            wave.push_back(std::async(std::launch::async, jobs[next]));
        for (auto& f : wave) f.get();
    }
}

/// Second derivative of a sampled series at interior index i (nonuniform safe).
inline double second_difference(std::span<const double> t, std::span<const double> y,
                                std::size_t i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    return 2.0 * (y[i - 1] / (h0 * (h0 + h1)) - y[i] / (h0 * h1) + y[i + 1] / (h1 * (h0 + h1)));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// scenario: verify-identities

/// Maximal relative residuals of the exact laws over one run: the mass decay
/// law, the integral energy law for H(v), the virial second-derivative
/// identity (finite differences of the action vs the direct right side), and
/// in the mass-critical case the closed-form action identity
/// variance(t) = quadratic(t) + triple damping integral.
struct IdentityReport {
    RunOutcome outcome;
    double mass_residual = 0.0;
    double energy_residual = 0.0;
    double virial_residual = 0.0;
    double sigma_residual = std::numeric_limits<double>::quiet_NaN();

    bool within(const IdentityTolerances& tol) const {
        if (!(mass_residual <= tol.mass)) return false;
        if (!(energy_residual <= tol.energy)) return false;
        if (!(virial_residual <= tol.virial)) return false;
        if (!std::isnan(sigma_residual) && !(sigma_residual <= tol.sigma)) return false;
        return true;
    }
};

inline IdentityReport verify_identities_from_series(std::span<const DiagnosticSample> s,
                                                    const ProblemSpec& spec) {
    IdentityReport rep;
    if (s.size() < 3) throw std::invalid_argument("identity checks need at least 3 samples");

    const double root_mass0 = std::sqrt(s[0].mass);
    double worst_mass = 0.0;
    for (const auto& smp : s) {
        const double expected = std::exp(-spec.damping * smp.t) * root_mass0;
        worst_mass = std::max(worst_mass, std::abs(std::sqrt(smp.mass) - expected));
    }
    rep.mass_residual = worst_mass / root_mass0;

    const auto res = energy_identity_residual(s, spec);
    double h_scale = 0.0, worst_energy = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        h_scale = std::max(h_scale, std::abs(s[i].h));
        worst_energy = std::max(worst_energy, std::abs(res[i]));
    }
    rep.energy_residual = h_scale > 0.0 ? worst_energy / h_scale : worst_energy;

    std::vector<double> t(s.size()), action(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        t[i] = s[i].t;
        action[i] = s[i].virial_action;
    }
    double accel_scale = 0.0;
    for (const auto& smp : s) accel_scale = std::max(accel_scale, std::abs(smp.virial_accel));
    double worst_virial = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double d2 = detail::second_difference(t, action, i);
        worst_virial = std::max(worst_virial, std::abs(d2 - s[i].virial_accel));
    }
    rep.virial_residual = accel_scale > 0.0 ? worst_virial / accel_scale : worst_virial;

    if (is_mass_critical(spec)) {
        const int N = spec.dimension;
        const double coeff = 32.0 * spec.damping / (N + 2.0);
        const double rate = 4.0 * spec.damping / N;
        const auto damping_term = damping_triple_integral(s, spec, coeff, rate);
        double var_scale = 0.0, worst_sigma = 0.0;
        for (const auto& smp : s) var_scale = std::max(var_scale, std::abs(smp.variance));
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double f = s[0].variance + 4.0 * s[0].momentum * t[i] +
                             8.0 * s[0].e * t[i] * t[i];
            worst_sigma = std::max(worst_sigma,
                                   std::abs(s[i].variance - f - damping_term[i]));
        }
        rep.sigma_residual = var_scale > 0.0 ? worst_sigma / var_scale : worst_sigma;
    }
    return rep;
}

inline IdentityReport verify_identities(const RunConfig& cfg) {
    const Field u0 = build_initial(cfg);
    const auto cutoff = build_cutoff(cfg);
    RunOutcome outcome = run(u0, cfg.problem, cfg.solver, cutoff ? &*cutoff : nullptr);
    IdentityReport rep = verify_identities_from_series(outcome.series, cfg.problem);
    rep.outcome = std::move(outcome);
    return rep;
}

// ---------------------------------------------------------------------------
// scenario: criteria-vs-outcome

struct VerdictSet {
    double e = 0.0;
    Moments plain;       // I, V of the datum
    Moments localized;   // J, W of the datum under the working cutoff
    CriterionVerdict sigma;
    std::vector<std::pair<RadialRegime, CriterionVerdict>> radial;

    bool predicted() const {
        if (sigma.predicted_blowup) return true;
        for (const auto& [regime, v] : radial)
            if (v.predicted_blowup) return true;
        return false;
    }
};

/// Working cutoff for verdict evaluation: the configured one, else a
/// mass-critical profile scaled to a quarter of the box.
inline RadialCutoff verdict_cutoff(const RunConfig& cfg) {
    if (cfg.cutoff)
        return RadialCutoff(cfg.cutoff->radius, cfg.cutoff->kind, cfg.cutoff->completion);
    const auto kind = is_mass_critical(cfg.problem) ? CutoffKind::MassCriticalTheta
                                                    : CutoffKind::GenericTheta;
    return RadialCutoff(0.25 * cfg.grid_extent, kind);
}

/// Criterion verdicts for one datum; no time integration involved.
/// Gaussian-family data is radially symmetric, so the radial criteria apply.
inline VerdictSet evaluate_verdicts(const RunConfig& cfg, const InitialData& data,
                                    const RadialCutoff& cutoff) {
    const Field u0 = build_initial(cfg, data);
    SpectralWorkspace ws(u0.grid);
    VerdictSet out;
    out.e = energy(u0, cfg.problem, ws).e;
    out.plain = weighted_moments(u0, ws);
    out.localized = localized_moments(u0, cutoff, ws);
    out.sigma = sigma_criterion(out.e, out.plain.momentum, out.plain.variance, cfg.problem);
    for (RadialRegime regime : {RadialRegime::MassCritical, RadialRegime::Supercritical,
                                RadialRegime::EnergyCritical}) {
        out.radial.emplace_back(
            regime, radial_criterion(out.e, out.localized.momentum, out.localized.variance,
                                     cfg.problem, regime, /*radial_data=*/true));
    }
    return out;
}

struct FamilyEntryReport {
    InitialData data;
    VerdictSet verdicts;
    std::vector<std::pair<double, OutcomeKind>> outcomes;  // per damping value
    std::optional<double> largest_detecting_a;
    bool disagreement = false;  // predicted blow-up not confirmed at smallest damping
};

struct CriteriaOutcomeReport {
    std::vector<FamilyEntryReport> entries;
    bool any_disagreement = false;
};

/// For every datum with a predicted blow-up, runs the solver at each damping
/// value and records whether detection occurs. Criteria are sufficient
/// conditions, so a prediction must be confirmed at the smallest damping.
inline CriteriaOutcomeReport criteria_vs_outcome(const RunConfig& cfg) {
    if (cfg.family.empty() || cfg.damping_list.empty())
        throw std::invalid_argument("criteria-vs-outcome needs a family and a damping list");
    std::vector<double> damping = cfg.damping_list;
    std::sort(damping.begin(), damping.end());

    const RadialCutoff cutoff = verdict_cutoff(cfg);
    CriteriaOutcomeReport report;
    report.entries.resize(cfg.family.size());
    for (std::size_t i = 0; i < cfg.family.size(); ++i) {
        report.entries[i].data = cfg.family[i];
        report.entries[i].verdicts = evaluate_verdicts(cfg, cfg.family[i], cutoff);
    }

    struct JobResult {
        OutcomeKind kind = OutcomeKind::Global;
    };
    std::vector<std::tuple<std::size_t, std::size_t>> coords;
    for (std::size_t i = 0; i < cfg.family.size(); ++i) {
        if (!report.entries[i].verdicts.predicted()) continue;
        for (std::size_t k = 0; k < damping.size(); ++k) coords.emplace_back(i, k);
    }
    std::vector<JobResult> results(coords.size());
    std::vector<std::function<void()>> jobs;
    jobs.reserve(coords.size());
    for (std::size_t c = 0; c < coords.size(); ++c) {
        jobs.push_back([&, c]() {
            const auto [i, k] = coords[c];
            ProblemSpec spec = cfg.problem;
            spec.damping = damping[k];
            const Field u0 = build_initial(cfg, cfg.family[i]);
            results[c].kind = run(u0, spec, cfg.solver).kind;
        });
    }
    detail::run_jobs(jobs, worker_count());

    for (std::size_t c = 0; c < coords.size(); ++c) {
        const auto [i, k] = coords[c];
        report.entries[i].outcomes.emplace_back(damping[k], results[c].kind);
    }
    for (auto& entry : report.entries) {
        std::sort(entry.outcomes.begin(), entry.outcomes.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [a, kind] : entry.outcomes)
            if (kind == OutcomeKind::BlowUp) {
                if (!entry.largest_detecting_a || a > *entry.largest_detecting_a)
                    entry.largest_detecting_a = a;
            }
        if (entry.verdicts.predicted() && !entry.outcomes.empty() &&
            entry.outcomes.front().second != OutcomeKind::BlowUp)
            entry.disagreement = true;
        report.any_disagreement = report.any_disagreement || entry.disagreement;
    }
    return report;
}

// ---------------------------------------------------------------------------
// scenario: threshold bisection

/// Bracket for the damping threshold separating detected collapse from
/// arrest. Monotonicity of the outcome in the damping is an observed
/// phenomenon, not a theorem; endpoints are validated first and any
/// non-monotone evidence aborts loudly.
struct ThresholdResult {
    double a_lo = 0.0;
    double a_hi = 0.0;
    int runs_performed = 0;
    std::vector<std::pair<double, OutcomeKind>> log;
};

inline ThresholdResult threshold_bisection(const RunConfig& cfg, double a_lo, double a_hi,
                                           double width) {
    if (!(a_lo < a_hi) || !(width > 0.0))
        throw std::invalid_argument("threshold bracket must satisfy a_lo < a_hi, width > 0");
    ThresholdResult result;
    auto classify_at = [&](double a) {
        ProblemSpec spec = cfg.problem;
        spec.damping = a;
        const Field u0 = build_initial(cfg);
        const OutcomeKind kind = run(u0, spec, cfg.solver).kind;
        ++result.runs_performed;
        result.log.emplace_back(a, kind);
        return kind;
    };

    if (classify_at(a_lo) != OutcomeKind::BlowUp)
        throw std::invalid_argument("threshold precondition: no blow-up detected at a_lo");
    if (classify_at(a_hi) != OutcomeKind::Global)
        throw std::invalid_argument("threshold precondition: run at a_hi is not global");

    while (a_hi - a_lo > width) {
        const double mid = 0.5 * (a_lo + a_hi);
        const OutcomeKind kind = classify_at(mid);
        if (kind == OutcomeKind::BlowUp) {
            a_lo = mid;
        } else if (kind == OutcomeKind::Global) {
            a_hi = mid;
        } else {
            throw std::runtime_error(
                "threshold bisection: resolution loss at a = " + std::to_string(mid) +
                "; refine the grid or thresholds");
        }
    }
    result.a_lo = a_lo;
    result.a_hi = a_hi;
    return result;
}

// ---------------------------------------------------------------------------
// scenario: scattering probe

/// Measures how fast the transformed flow settles onto a free evolution:
/// the Cauchy increment between the back-propagated states at t1 and t2,
/// the scattering deficit series against u_plus estimated from t2, and the
/// space-time norm that the continuity argument monitors.
struct ScatterReport {
    double t1 = 0.0;
    double t2 = 0.0;
    double cauchy_increment = 0.0;
    std::vector<std::pair<double, double>> deficit_series;
    double strichartz = 0.0;
    double strichartz_q = 0.0;
    double strichartz_r = 0.0;
};

namespace detail {

inline std::pair<double, double> strichartz_exponents(int dimension) {
    if (dimension >= 3) {
        const double n = dimension;
        return {2.0 * n / (n - 2.0), 2.0 * n * n / (n * n - 2.0 * n + 4.0)};
    }
    if (dimension == 2) return {4.0, 4.0};
    return {8.0, 4.0};
}

}  // namespace detail

inline ScatterReport scattering_probe(const RunConfig& cfg, double t1, double t2) {
    if (!(0.0 < t1 && t1 < t2))
        throw std::invalid_argument("scatter probe needs 0 < t1 < t2");
    if (t2 > cfg.solver.t_final + 1e-12)
        throw std::invalid_argument("scatter probe needs t2 <= t_final");

    const Field u0 = build_initial(cfg);
    std::vector<Field> kept;
    const double lead = 1e-9;
    SnapshotSink sink = [&](const Field& f) {
        if (f.time >= t1 - lead && f.time <= t2 + lead) kept.push_back(f);
    };
    const RunOutcome outcome = run(u0, cfg.problem, cfg.solver, nullptr, sink);
    if (outcome.kind != OutcomeKind::Global)
        throw std::runtime_error("scatter probe: run did not stay global");
    if (kept.size() < 2)
        throw std::invalid_argument("scatter probe: sampling too coarse for [t1, t2]");

    SpectralWorkspace ws(u0.grid);
    auto transformed = [&](const Field& f) {
        return change_variable(f, f.time, cfg.problem.damping, VariableDirection::ToTransformed);
    };
    auto nearest = [&](double t) -> const Field& {
        std::size_t best = 0;
        for (std::size_t i = 1; i < kept.size(); ++i)
            if (std::abs(kept[i].time - t) < std::abs(kept[best].time - t)) best = i;
        return kept[best];
    };

    ScatterReport rep;
    const Field& at1 = nearest(t1);
    const Field& at2 = nearest(t2);
    rep.t1 = at1.time;
    rep.t2 = at2.time;

    const Field v2 = transformed(at2);
    const Field v1 = transformed(at1);
    const Field back2 = free_propagate(v2, -at2.time, ws);
    const Field back1 = free_propagate(v1, -at1.time, ws);
    Field diff = back2;
    for (std::size_t p = 0; p < diff.values.size(); ++p) diff.values[p] -= back1.values[p];
    rep.cauchy_increment = h1_norm(diff, ws);

    const Field u_plus = back2;  // scattering state estimated from the later time
    std::vector<Field> v_window;
    v_window.reserve(kept.size());
    for (const auto& f : kept) {
        rep.deficit_series.emplace_back(f.time, scattering_deficit(f, u_plus, cfg.problem, ws));
        v_window.push_back(transformed(f));
    }

    const auto [q, r] = detail::strichartz_exponents(cfg.problem.dimension);
    rep.strichartz_q = q;
    rep.strichartz_r = r;
    rep.strichartz = strichartz_norm(v_window, q, r, ws);
    return rep;
}

// ---------------------------------------------------------------------------
// report emission

struct ReportPaths {
    std::filesystem::path summary;
    std::filesystem::path series;
};

/// Writes <hash>.summary.json and <hash>.series.csv under cfg.output_dir;
/// file names are content-addressed by the configuration hash, so identical
/// configs land on identical names with identical CSV bytes.
inline ReportPaths emit_report(const RunConfig& cfg, const json& summary_extra,
                               std::span<const DiagnosticSample> series) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const std::string hash = config_hash(cfg);
    ReportPaths paths;
    paths.summary = fs::path(cfg.output_dir) / (hash + ".summary.json");
    paths.series = fs::path(cfg.output_dir) / (hash + ".series.csv");

    json summary{{"hash", hash}, {"config", to_json(cfg)}};
    summary.update(summary_extra);
    std::ofstream os(paths.summary, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + paths.summary.string());
    os << summary.dump(2) << '\n';

    std::ofstream cs(paths.series, std::ios::trunc);
    if (!cs) throw std::runtime_error("cannot write " + paths.series.string());
    write_csv(cs, series);
    return paths;
}

inline json outcome_to_json(const RunOutcome& outcome) {
    json j{{"kind", to_string(outcome.kind)},
           {"t_end", outcome.t_end},
           {"samples", outcome.series.size()},
           {"max_boundary_fraction", outcome.max_boundary_fraction}};
    if (outcome.reason) j["reason"] = to_string(*outcome.reason);
    if (outcome.kind == OutcomeKind::ResolutionLoss) j["tail_fraction"] = outcome.tail_at_end;
    return j;
}

}  // namespace dnls
