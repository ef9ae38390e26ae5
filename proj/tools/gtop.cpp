// gtop — simulate and analyse a spinning top whose tip glides with friction.
//
//   gtop run   <config>   integrate one trajectory, write CSV + JSON report
//   gtop sweep <config>   run a parameter grid, write an incremental summary
//   gtop check <config>   run the property suites, exit nonzero on failure

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <gtop/checksuite.hpp>
#include <gtop/config.hpp>
#include <gtop/integrate.hpp>
#include <gtop/output.hpp>
#include <gtop/stability.hpp>
#include <gtop/sweep.hpp>

namespace {

namespace fs = std::filesystem;

std::string resolve_out(const std::string& path, const std::string& out_dir) {
    if (path.empty()) return path;
    fs::path p(path);
    if (!out_dir.empty() && p.is_relative()) p = fs::path(out_dir) / p;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p.string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool quiet) {
    const gtop::RunConfig cfg = gtop::load_run_config(config_path);
    const gtop::PhysicalParams params = cfg.make_params();
    const gtop::FrictionModel friction = cfg.make_friction();
    const gtop::VectorState initial = cfg.make_initial(params);

    const gtop::Trajectory traj =
        gtop::integrate(initial, params, friction, cfg.integrator, cfg.convergence);
    const gtop::ConvergenceResult conv =
        gtop::detect_convergence(traj, params, cfg.convergence);
    const gtop::StabilityReport stab =
        gtop::classify_stability(dot(initial.L, initial.axis), params);

    if (const std::string path = resolve_out(cfg.outputs.trajectory_csv, out_dir); !path.empty()) {
        auto out = open_out(path);
        gtop::write_trajectory_csv(out, traj, params);
    }
    if (const std::string path = resolve_out(cfg.outputs.report_json, out_dir); !path.empty()) {
        auto out = open_out(path);
        out << gtop::build_run_report(traj, params, conv, stab).dump(2) << '\n';
    }

    if (!quiet) {
        const gtop::InvariantDrifts drifts = gtop::compute_drifts(traj, params);
        std::cout << "termination: " << gtop::to_string(traj.termination.kind) << " at t="
                  << traj.termination.t << "\n"
                  << "limit: " << gtop::to_string(conv.limit);
        if (conv.limit != gtop::Limit::Undetermined)
            std::cout << " (t_converged=" << conv.t_converged << ")";
        std::cout << "\npredicted upright stability: "
                  << (stab.upright_stable ? "stable" : "unstable") << " (|LA3|="
                  << std::abs(stab.LA3) << ", threshold=" << stab.threshold << ")\n"
                  << "drifts: L3_rel=" << drifts.L3_rel_max
                  << " E_increase=" << drifts.energy_increase_max << " vAz=" << drifts.vAz_max
                  << "\n";
    }
    return traj.termination.kind == gtop::TerminationKind::DegenerateDenominator ? 1 : 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, bool quiet) {
    const gtop::SweepConfig cfg = gtop::load_sweep_config(config_path);
    std::string summary_path = cfg.base.outputs.summary_csv.empty() ? "sweep_summary.csv"
                                                                    : cfg.base.outputs.summary_csv;
    summary_path = resolve_out(summary_path, out_dir);

    auto out = open_out(summary_path);
    const std::vector<gtop::SweepRow> rows = gtop::run_sweep(cfg, &out);

    long failures = 0;
    for (const auto& r : rows) failures += r.error.empty() ? 0 : 1;
    if (!quiet)
        std::cout << "sweep: " << rows.size() << " points, " << failures
                  << " failed; summary at " << summary_path << "\n";
    return 0;
}

int cmd_check(const std::string& config_path, const std::string& out_dir, bool quiet,
              std::uint64_t seed) {
    const gtop::RunConfig cfg = gtop::load_run_config(config_path);
    const std::vector<gtop::SuiteResult> suites = gtop::run_check_suites(cfg, seed);

    bool all = true;
    for (const auto& s : suites) {
        all = all && s.passed;
        if (!quiet) {
            std::cout << (s.passed ? "PASS " : "FAIL ") << s.name;
            if (!s.note.empty()) std::cout << " (" << s.note << ")";
            std::cout << "\n";
        }
    }

    std::string report_path = cfg.outputs.report_json;
    if (report_path.empty() && !out_dir.empty()) report_path = "check_report.json";
    if (const std::string path = resolve_out(report_path, out_dir); !path.empty()) {
        auto out = open_out(path);
        out << gtop::build_check_report(suites).dump(2) << '\n';
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gliding-top simulation and analysis toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string out_dir;
    std::uint64_t seed = 42;
    bool quiet = false;
    app.add_option("--out-dir", out_dir, "directory prefix for relative output paths");
    app.add_option("--seed", seed, "seed for randomized property scans");
    app.add_flag("--quiet", quiet, "suppress the console summary");

    std::string run_cfg, sweep_cfg, check_cfg;
    CLI::App* run = app.add_subcommand("run", "integrate one configured trajectory");
    run->add_option("config", run_cfg, "run configuration file")->required();
    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter grid");
    sweep->add_option("config", sweep_cfg, "sweep configuration file")->required();
    CLI::App* check = app.add_subcommand("check", "run the property suites");
    check->add_option("config", check_cfg, "run configuration file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_cfg, out_dir, quiet);
        if (sweep->parsed()) return cmd_sweep(sweep_cfg, out_dir, quiet);
        if (check->parsed()) return cmd_check(check_cfg, out_dir, quiet, seed);
    } catch (const gtop::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
