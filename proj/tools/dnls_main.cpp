// Command-line driver: simulation scenarios, diagnostics over saved
// snapshots, criterion verdicts, threshold bisection, scattering probe, and
// the cutoff positivity table. Exit codes: 0 success / within tolerance,
// 1 tolerance breach or detection-level failure, 2 precondition error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "dnls/dnls.hpp"

namespace fs = std::filesystem;
using dnls::json;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

int run_simulate(const std::string& config_path) {
    dnls::RunConfig cfg = dnls::load_config(config_path);
    Timer timer;

    switch (cfg.scenario) {
        case dnls::Scenario::VerifyIdentities: {
            const auto rep = dnls::verify_identities(cfg);
            json extra{{"scenario", "verify-identities"},
                       {"outcome", dnls::outcome_to_json(rep.outcome)},
                       {"residuals",
                        json{{"mass", rep.mass_residual},
                             {"energy", rep.energy_residual},
                             {"virial", rep.virial_residual},
                             {"sigma", rep.sigma_residual}}},
                       {"wall_time_s", timer.seconds()}};
            const auto paths = dnls::emit_report(cfg, extra, rep.outcome.series);
            const bool ok = rep.within(cfg.tolerances);
            std::cout << "verify-identities: mass=" << rep.mass_residual
                      << " energy=" << rep.energy_residual
                      << " virial=" << rep.virial_residual << " sigma=" << rep.sigma_residual
                      << (ok ? "  [within tolerance]" : "  [TOLERANCE BREACH]") << "\n"
                      << "report: " << paths.summary.string() << "\n";
            return ok ? 0 : 1;
        }
        case dnls::Scenario::CriteriaVsOutcome: {
            const auto rep = dnls::criteria_vs_outcome(cfg);
            json entries = json::array();
            for (const auto& e : rep.entries) {
                json outcomes = json::array();
                for (const auto& [a, kind] : e.outcomes)
                    outcomes.push_back(json{{"damping", a}, {"outcome", dnls::to_string(kind)}});
                json verdicts{{"E", e.verdicts.e},
                              {"variance", e.verdicts.plain.variance},
                              {"momentum", e.verdicts.plain.momentum},
                              {"predicted", e.verdicts.predicted()}};
                entries.push_back(json{{"initial", dnls::to_json(e.data)},
                                       {"verdicts", verdicts},
                                       {"outcomes", outcomes},
                                       {"disagreement", e.disagreement}});
            }
            json extra{{"scenario", "criteria-vs-outcome"},
                       {"entries", entries},
                       {"any_disagreement", rep.any_disagreement},
                       {"wall_time_s", timer.seconds()}};
            dnls::emit_report(cfg, extra, {});
            std::cout << "criteria-vs-outcome: " << rep.entries.size() << " data, "
                      << (rep.any_disagreement ? "DISAGREEMENT FOUND" : "all consistent")
                      << "\n";
            return rep.any_disagreement ? 1 : 0;
        }
        case dnls::Scenario::Simulate:
        default: {
            const dnls::Field u0 = dnls::build_initial(cfg);
            const auto cutoff = dnls::build_cutoff(cfg);
            std::vector<std::pair<double, dnls::Field>> snaps;
            dnls::SnapshotSink sink;
            if (cfg.save_snapshots)
                sink = [&snaps](const dnls::Field& f) { snaps.emplace_back(f.time, f); };
            const auto outcome =
                dnls::run(u0, cfg.problem, cfg.solver, cutoff ? &*cutoff : nullptr, sink);
            json extra{{"scenario", "simulate"},
                       {"outcome", dnls::outcome_to_json(outcome)},
                       {"wall_time_s", timer.seconds()}};
            const auto paths = dnls::emit_report(cfg, extra, outcome.series);
            if (cfg.save_snapshots) {
                const std::string hash = dnls::config_hash(cfg);
                int index = 0;
                for (const auto& [t, f] : snaps) {
                    char name[64];
                    std::snprintf(name, sizeof(name), "%s.%05d.snap", hash.c_str(), index++);
                    dnls::write_snapshot(fs::path(cfg.output_dir) / name, f, cfg.problem);
                }
            }
            std::cout << "outcome: " << dnls::to_string(outcome.kind)
                      << " t_end=" << outcome.t_end;
            if (outcome.reason) std::cout << " reason=" << dnls::to_string(*outcome.reason);
            std::cout << "\nreport: " << paths.summary.string() << "\n";
            return 0;
        }
    }
}

int run_diagnose(const std::string& dir, const std::string& out,
                 double cutoff_radius, const std::string& cutoff_kind) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".snap") files.push_back(entry.path());
    if (files.empty()) {
        std::cerr << "no .snap files in " << dir << "\n";
        return 2;
    }
    std::sort(files.begin(), files.end());

    std::vector<dnls::Snapshot> snaps;
    for (const auto& f : files) snaps.push_back(dnls::read_snapshot(f));
    std::sort(snaps.begin(), snaps.end(),
              [](const auto& a, const auto& b) { return a.field.time < b.field.time; });

    std::optional<dnls::RadialCutoff> cutoff;
    if (cutoff_radius > 0.0)
        cutoff.emplace(cutoff_radius, cutoff_kind == "generic"
                                          ? dnls::CutoffKind::GenericTheta
                                          : dnls::CutoffKind::MassCriticalTheta);

    dnls::SpectralWorkspace ws(snaps.front().field.grid);
    std::vector<dnls::DiagnosticSample> series;
    for (const auto& s : snaps)
        series.push_back(dnls::sample(s.field, s.spec, cutoff ? &*cutoff : nullptr, ws));

    if (out.empty()) {
        dnls::write_csv(std::cout, series);
    } else {
        std::ofstream os(out, std::ios::trunc);
        if (!os) {
            std::cerr << "cannot write " << out << "\n";
            return 2;
        }
        dnls::write_csv(os, series);
    }
    return 0;
}

int run_criteria(const std::string& config_path) {
    const dnls::RunConfig cfg = dnls::load_config(config_path);
    const dnls::RadialCutoff cutoff = dnls::verdict_cutoff(cfg);
    const auto set = dnls::evaluate_verdicts(cfg, cfg.initial, cutoff);

    auto verdict_json = [](const dnls::CriterionVerdict& v) {
        json j{{"applicable", v.applicable},
               {"branch", dnls::to_string(v.branch)},
               {"predicted_blowup", v.predicted_blowup},
               {"boundary_case", v.boundary_case}};
        if (v.t_star) j["t_star"] = *v.t_star;
        if (v.delta_used) j["delta_used"] = *v.delta_used;
        return j;
    };
    json out{{"class", dnls::to_string(dnls::classify(cfg.problem))},
             {"E", set.e},
             {"variance", set.plain.variance},
             {"momentum", set.plain.momentum},
             {"local_variance", set.localized.variance},
             {"local_momentum", set.localized.momentum},
             {"cutoff_radius", cutoff.radius()},
             {"weighted_space", verdict_json(set.sigma)}};
    for (const auto& [regime, verdict] : set.radial)
        out[std::string("radial_") + dnls::to_string(regime)] = verdict_json(verdict);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_threshold(const std::string& config_path, double a_lo, double a_hi, double width) {
    dnls::RunConfig cfg = dnls::load_config(config_path);
    Timer timer;
    const auto result = dnls::threshold_bisection(cfg, a_lo, a_hi, width);
    json log = json::array();
    for (const auto& [a, kind] : result.log)
        log.push_back(json{{"damping", a}, {"outcome", dnls::to_string(kind)}});
    json extra{{"scenario", "threshold"},
               {"bracket", json{{"a_lo", result.a_lo}, {"a_hi", result.a_hi}}},
               {"runs", result.runs_performed},
               {"log", log},
               {"wall_time_s", timer.seconds()}};
    dnls::emit_report(cfg, extra, {});
    std::cout << "threshold bracket: [" << result.a_lo << ", " << result.a_hi << "] after "
              << result.runs_performed << " runs\n";
    return 0;
}

int run_scatter(const std::string& config_path, double t1, double t2) {
    dnls::RunConfig cfg = dnls::load_config(config_path);
    Timer timer;
    const auto rep = dnls::scattering_probe(cfg, t1, t2);
    json deficits = json::array();
    for (const auto& [t, d] : rep.deficit_series)
        deficits.push_back(json{{"t", t}, {"deficit", d}});
    json extra{{"scenario", "scatter-probe"},
               {"t1", rep.t1},
               {"t2", rep.t2},
               {"cauchy_increment", rep.cauchy_increment},
               {"deficits", deficits},
               {"strichartz", json{{"value", rep.strichartz},
                                   {"q", rep.strichartz_q},
                                   {"r", rep.strichartz_r}}},
               {"wall_time_s", timer.seconds()}};
    dnls::emit_report(cfg, extra, {});
    std::cout << "cauchy increment [" << rep.t1 << ", " << rep.t2
              << "] = " << rep.cauchy_increment << ", strichartz = " << rep.strichartz << "\n";
    return 0;
}

int run_verify_cutoff(int dimension, double eps, double constant, double radius,
                      const std::string& kind_name) {
    const auto kind = kind_name == "generic" ? dnls::CutoffKind::GenericTheta
                                             : dnls::CutoffKind::MassCriticalTheta;
    const dnls::RadialCutoff cutoff(radius, kind);
    // Margin table over [0, 4R].
    std::cout << "r,chi1,chi2,margin\n";
    const int rows = 256;
    for (int i = 0; i <= rows; ++i) {
        const double r = 4.0 * radius * i / rows;
        const auto ev = cutoff.evaluate(r, dimension);
        const double margin =
            ev.chi1 - constant * eps * std::pow(std::max(ev.chi2, 0.0), 0.5 * dimension);
        std::printf("%.17g,%.17g,%.17g,%.17g\n", r, ev.chi1, ev.chi2, margin);
    }
    const auto report = dnls::verify_positivity(cutoff, dimension, eps, constant, 16384);
    std::cerr << "min margin " << report.min_margin << " at r = " << report.worst_radius
              << (report.nonnegative ? " (nonnegative)" : " (VIOLATION)") << "\n";
    return report.nonnegative ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"damped nonlinear Schrodinger simulator and diagnostics"};
    app.require_subcommand(1);

    std::string config_path, snap_dir, out_path, cutoff_kind = "mass-critical";
    double a_lo = 0.0, a_hi = 5.0, width = 0.05, t1 = 1.0, t2 = 2.0;
    double eps = 0.05, constant = 1.0, radius = 8.0, diag_radius = 0.0;
    int dimension = 2;

    auto* simulate = app.add_subcommand("simulate", "run the scenario in a config file");
    simulate->add_option("--config", config_path, "JSON run configuration")->required();

    auto* diagnose = app.add_subcommand("diagnose", "compute diagnostics over saved snapshots");
    diagnose->add_option("--snapshots", snap_dir, "directory of .snap files")->required();
    diagnose->add_option("--out", out_path, "CSV output path (stdout when omitted)");
    diagnose->add_option("--cutoff-radius", diag_radius, "localized-weight radius (off when 0)");
    diagnose->add_option("--cutoff-kind", cutoff_kind, "mass-critical | generic");

    auto* criteria = app.add_subcommand("criteria", "blow-up criterion verdicts for a datum");
    criteria->add_option("--config", config_path, "JSON run configuration")->required();

    auto* threshold = app.add_subcommand("threshold", "bisect the damping threshold");
    threshold->add_option("--config", config_path, "JSON run configuration")->required();
    threshold->add_option("--a-lo", a_lo, "bracket start (blow-up expected)")->required();
    threshold->add_option("--a-hi", a_hi, "bracket end (global expected)")->required();
    threshold->add_option("--width", width, "target bracket width")->required();

    auto* scatter = app.add_subcommand("scatter", "scattering probe between two times");
    scatter->add_option("--config", config_path, "JSON run configuration")->required();
    scatter->add_option("--t1", t1, "earlier comparison time")->required();
    scatter->add_option("--t2", t2, "later comparison time")->required();

    auto* vcut = app.add_subcommand("verify-cutoff", "positivity margin table for chi_1, chi_2");
    vcut->add_option("--n", dimension, "space dimension")->required();
    vcut->add_option("--eps", eps, "epsilon in the margin")->required();
    vcut->add_option("--c", constant, "constant C in the margin")->required();
    vcut->add_option("--radius", radius, "cutoff radius R");
    vcut->add_option("--kind", cutoff_kind, "mass-critical | generic");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(config_path);
        if (diagnose->parsed()) return run_diagnose(snap_dir, out_path, diag_radius, cutoff_kind);
        if (criteria->parsed()) return run_criteria(config_path);
        if (threshold->parsed()) return run_threshold(config_path, a_lo, a_hi, width);
        if (scatter->parsed()) return run_scatter(config_path, t1, t2);
        if (vcut->parsed()) return run_verify_cutoff(dimension, eps, constant, radius, cutoff_kind);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "precondition error: " << ex.what() << "\n";
        return 2;
    } catch (const std::domain_error& ex) {
        std::cerr << "precondition error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 2;
}
