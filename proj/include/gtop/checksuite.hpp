#pragma once

// Property suites behind the `check` verb: cross-chart equivalence,
// conservation, the two dissipation rate laws, and the fixed-point /
// reaction-force scans. Each suite reports measured drifts so a failure is
// diagnosable from the JSON alone.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include <gtop/charts.hpp>
#include <gtop/checks.hpp>
#include <gtop/config.hpp>
#include <gtop/integrate.hpp>
#include <gtop/output.hpp>

namespace gtop {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::vector<std::pair<std::string, double>> measurements;
    std::string note;
};

inline nlohmann::json to_json(const SuiteResult& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["passed"] = r.passed;
    nlohmann::json m;
    for (const auto& [k, v] : r.measurements) m[k] = v;
    j["measurements"] = m;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

namespace detail {

inline double rel_diff(double a, double b, double floor_scale) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor_scale});
}

/// Fourth-order central difference on a uniformly sampled series.
inline double fd5_at(const std::vector<double>& f, std::size_t i, double dt) {
    return (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * dt);
}

inline SuiteResult cross_chart_suite(const PhysicalParams& p, const FrictionModel& friction,
                                     int n, std::uint64_t seed) {
    SuiteResult res;
    res.name = "cross_chart";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    double worst_rate = 0.0, worst_round = 0.0, worst_energy = 0.0, worst_moms = 0.0;
    for (int i = 0; i < n; ++i) {
        EulerState e;
        e.theta = 0.15 + (std::numbers::pi - 0.3) * u(rng);
        e.thetadot = -3.0 + 6.0 * u(rng);
        e.phidot = -5.0 + 10.0 * u(rng);
        e.omega3 = -150.0 + 300.0 * u(rng);
        e.nux = -0.5 + u(rng);
        e.nuy = -0.5 + u(rng);
        const double phi = 2.0 * std::numbers::pi * u(rng);

        const VectorState v = euler_to_vector(e, phi, p);
        const EulerWithAzimuth back = vector_to_euler(v, p);
        const VectorState v2 = euler_to_vector(back.state, back.phi, p);
        worst_round = std::max({worst_round, std::abs(v2.rdot.x - v.rdot.x),
                                std::abs(v2.rdot.y - v.rdot.y), norm(v2.L - v.L),
                                norm(v2.axis - v.axis)});

        const VectorDerivatives dv = derivatives_vector(v, p, friction);
        const EulerDerivatives de = derivatives_euler(e, p, friction);
        const VectorRate push = euler_rate_pushforward(e, phi, de.rate, p);
        const double floor_scale = 1e-4;
        worst_rate = std::max({worst_rate,
                               rel_diff(push.rddot.x, dv.rate.rddot.x, floor_scale),
                               rel_diff(push.rddot.y, dv.rate.rddot.y, floor_scale),
                               rel_diff(push.Ldot.x, dv.rate.Ldot.x, floor_scale),
                               rel_diff(push.Ldot.y, dv.rate.Ldot.y, floor_scale),
                               rel_diff(push.Ldot.z, dv.rate.Ldot.z, floor_scale),
                               rel_diff(push.axis_dot.x, dv.rate.axis_dot.x, floor_scale),
                               rel_diff(push.axis_dot.y, dv.rate.axis_dot.y, floor_scale),
                               rel_diff(push.axis_dot.z, dv.rate.axis_dot.z, floor_scale)});

        worst_energy = std::max(worst_energy, std::abs(total_energy(v, p) - total_energy(e, p)) /
                                                  std::max(1.0, std::abs(total_energy(e, p))));
        const MomentumScalars mv = angular_momentum_scalars(v, p);
        const MomentumScalars me = angular_momentum_scalars(e, p);
        worst_moms = std::max({worst_moms, std::abs(mv.L3 - me.L3), std::abs(mv.Lz - me.Lz),
                               std::abs(mv.LAz - me.LAz)});
    }
    res.measurements = {{"rate_rel_max", worst_rate},
                        {"roundtrip_max", worst_round},
                        {"energy_rel_max", worst_energy},
                        {"momenta_abs_max", worst_moms}};
    res.passed = worst_rate < 1e-9 && worst_round < 1e-10 && worst_energy < 1e-10 &&
                 worst_moms < 1e-10;
    return res;
}

struct SuiteTrajectory {
    Trajectory traj;
    PhysicalParams params;
    double mu = 0.0;
};

inline SuiteTrajectory suite_run(const RunConfig& base, bool force_frictionless,
                                 double sample_dt_cap) {
    RunConfig cfg = base;
    if (force_frictionless) cfg.friction.mu = 0.0;
    cfg.integrator.t_end = std::min(cfg.integrator.t_end, 10.0);
    cfg.integrator.sample_dt = std::min(cfg.integrator.sample_dt, sample_dt_cap);
    cfg.integrator.rel_tol = std::min(cfg.integrator.rel_tol, 1e-11);
    cfg.integrator.abs_tol = std::min(cfg.integrator.abs_tol, 1e-13);
    cfg.integrator.detect_convergence = false;

    SuiteTrajectory out{Trajectory{}, cfg.make_params(), cfg.friction.mu};
    out.traj = integrate(cfg.make_initial(out.params), out.params, cfg.make_friction(),
                         cfg.integrator, cfg.convergence);
    return out;
}

inline SuiteResult axial_conservation_suite(const RunConfig& base) {
    SuiteResult res;
    res.name = "axial_conservation";
    const SuiteTrajectory run = suite_run(base, false, 1e-2);
    const InvariantDrifts d = compute_drifts(run.traj, run.params);
    res.measurements = {{"L3_rel_drift", d.L3_rel_max},
                        {"energy_increase_max", d.energy_increase_max},
                        {"vAz_max", d.vAz_max},
                        {"t_final", run.traj.samples.back().t}};
    res.passed = run.traj.termination.kind != TerminationKind::DegenerateDenominator &&
                 d.L3_rel_max < 1e-8 && d.vAz_max < 1e-9;
    return res;
}

inline SuiteResult classical_limit_suite(const RunConfig& base) {
    SuiteResult res;
    res.name = "classical_limit";
    const SuiteTrajectory run = suite_run(base, true, 1e-2);
    const double E0 = run.traj.samples.front().scalars.energy;
    const double Lz0 = run.traj.samples.front().scalars.Lz;
    double dE = 0.0, dLz = 0.0;
    for (const auto& s : run.traj.samples) {
        dE = std::max(dE, std::abs(s.scalars.energy - E0) / std::max(1.0, std::abs(E0)));
        dLz = std::max(dLz, std::abs(s.scalars.Lz - Lz0) / std::max(1e-300, std::abs(Lz0)));
    }
    res.measurements = {{"energy_rel_drift", dE}, {"Lz_rel_drift", dLz}};
    res.passed = dE < 1e-8 && dLz < 1e-8;
    return res;
}

inline SuiteResult dissipation_identity_suite(const RunConfig& base) {
    SuiteResult res;
    res.name = "dissipation_identity";
    const double dt = std::min(base.integrator.sample_dt, 5e-4);
    const SuiteTrajectory run = suite_run(base, false, dt);

    // Euler-chart energy per chart-valid sample; the identity validates the
    // pivot-inertia value used by that expression.
    const FrictionModel friction = FrictionModel::constant(run.mu);
    std::vector<double> energy, formula;
    std::vector<bool> eligible;
    for (const auto& s : run.traj.samples) {
        const double st = std::hypot(s.state.axis.x, s.state.axis.y);
        if (st < run.params.sin_guard * 10.0) break; // keep the series uniform
        const EulerWithAzimuth eu = vector_to_euler(s.state, run.params);
        energy.push_back(total_energy(eu.state, run.params));
        formula.push_back(-run.mu * s.scalars.gn * s.scalars.vA_norm * s.scalars.vA_norm);
        eligible.push_back(s.scalars.vA_norm > 1e-3);
    }

    double worst_rel = 0.0, worst_abs = 0.0, formula_max = 0.0;
    long n_checked = 0;
    for (std::size_t i = 2; i + 2 < energy.size(); ++i) {
        if (!eligible[i]) continue;
        const double fd = fd5_at(energy, i, dt);
        worst_abs = std::max(worst_abs, std::abs(fd - formula[i]));
        formula_max = std::max(formula_max, std::abs(formula[i]));
        if (std::abs(formula[i]) > 1e-12)
            worst_rel = std::max(worst_rel, std::abs(fd - formula[i]) / std::abs(formula[i]));
        ++n_checked;
    }
    res.measurements = {{"rel_err_max", worst_rel},
                        {"abs_err_max", worst_abs},
                        {"formula_max", formula_max},
                        {"samples_checked", static_cast<double>(n_checked)}};
    if (n_checked == 0) {
        res.note = "no samples with |v_A| > 1e-3";
        res.passed = true;
    } else if (formula_max < 1e-12) {
        res.passed = worst_abs < 1e-6; // frictionless: rate must vanish
    } else {
        res.passed = worst_rel < 1e-5;
    }
    return res;
}

inline SuiteResult momentum_rate_suite(const RunConfig& base) {
    SuiteResult res;
    res.name = "vertical_momentum_rate";
    const double dt = std::min(base.integrator.sample_dt, 5e-4);
    const SuiteTrajectory run = suite_run(base, false, dt);

    std::vector<double> Lz, formula;
    std::vector<bool> eligible;
    for (const auto& s : run.traj.samples) {
        const double st = std::hypot(s.state.axis.x, s.state.axis.y);
        if (st < run.params.sin_guard * 10.0) break;
        const EulerWithAzimuth eu = vector_to_euler(s.state, run.params);
        Lz.push_back(s.scalars.Lz);
        formula.push_back(run.params.l * run.mu * s.scalars.gn * eu.state.nuy *
                          std::sin(eu.state.theta));
        eligible.push_back(std::abs(eu.state.nuy) > 1e-3);
    }

    double worst_rel = 0.0, worst_abs = 0.0, formula_max = 0.0;
    long n_checked = 0;
    for (std::size_t i = 2; i + 2 < Lz.size(); ++i) {
        if (!eligible[i]) continue;
        const double fd = fd5_at(Lz, i, dt);
        worst_abs = std::max(worst_abs, std::abs(fd - formula[i]));
        formula_max = std::max(formula_max, std::abs(formula[i]));
        if (std::abs(formula[i]) > 1e-14)
            worst_rel = std::max(worst_rel, std::abs(fd - formula[i]) / std::abs(formula[i]));
        ++n_checked;
    }
    res.measurements = {{"rel_err_max", worst_rel},
                        {"abs_err_max", worst_abs},
                        {"formula_max", formula_max},
                        {"samples_checked", static_cast<double>(n_checked)}};
    if (n_checked == 0) {
        res.note = "no samples with |nu_y| > 1e-3";
        res.passed = true;
    } else if (formula_max < 1e-14) {
        res.passed = worst_abs < 1e-8;
    } else {
        res.passed = worst_rel < 1e-5;
    }
    return res;
}

inline SuiteResult fixed_point_suite(const RunConfig& base, std::uint64_t seed) {
    SuiteResult res;
    res.name = "fixed_point_family";
    const FixedPointScan scan =
        verify_fixed_point_family(base.make_params(), base.make_friction(), 1000, seed);
    res.measurements = {
        {"invariant_tilted_states", static_cast<double>(scan.invariant_tilted_states)},
        {"min_tilted_rate_norm", scan.min_tilted_rate_norm},
        {"upright_rate_norm", scan.upright_rate_norm},
        {"inverted_rate_norm", scan.inverted_rate_norm}};
    res.passed = scan.passed;
    return res;
}

inline SuiteResult gn_zero_suite(const RunConfig& base, std::uint64_t seed) {
    SuiteResult res;
    res.name = "gn_zero_not_invariant";
    const GnZeroScan scan = verify_no_gn_zero_solutions(base.make_params(), 1000, seed);
    res.measurements = {{"constructed", static_cast<double>(scan.constructed)},
                        {"skipped", static_cast<double>(scan.skipped)},
                        {"departed", static_cast<double>(scan.departed)},
                        {"min_peak_ratio", scan.min_peak_ratio},
                        {"max_departure_time", scan.max_departure_time}};
    res.passed = scan.passed;
    return res;
}

} // namespace detail

/// Runs every property suite at the configured parameters.
inline std::vector<SuiteResult> run_check_suites(const RunConfig& cfg, std::uint64_t seed) {
    std::vector<SuiteResult> out;
    const auto guarded = [&out](SuiteResult (*fn)(const RunConfig&), const RunConfig& cfg,
                                const char* name) {
        try {
            out.push_back(fn(cfg));
        } catch (const std::exception& e) {
            SuiteResult r;
            r.name = name;
            r.passed = false;
            r.note = e.what();
            out.push_back(r);
        }
    };

    try {
        out.push_back(detail::cross_chart_suite(cfg.make_params(), cfg.make_friction(), 2000, seed));
    } catch (const std::exception& e) {
        out.push_back({"cross_chart", false, {}, e.what()});
    }
    guarded(detail::axial_conservation_suite, cfg, "axial_conservation");
    guarded(detail::classical_limit_suite, cfg, "classical_limit");
    guarded(detail::dissipation_identity_suite, cfg, "dissipation_identity");
    guarded(detail::momentum_rate_suite, cfg, "vertical_momentum_rate");
    try {
        out.push_back(detail::fixed_point_suite(cfg, seed));
    } catch (const std::exception& e) {
        out.push_back({"fixed_point_family", false, {}, e.what()});
    }
    try {
        out.push_back(detail::gn_zero_suite(cfg, seed));
    } catch (const std::exception& e) {
        out.push_back({"gn_zero_not_invariant", false, {}, e.what()});
    }
    return out;
}

inline nlohmann::json build_check_report(const std::vector<SuiteResult>& suites) {
    nlohmann::json j;
    j["schema_version"] = 1;
    bool all = true;
    nlohmann::json arr = nlohmann::json::array();
    for (const SuiteResult& s : suites) {
        arr.push_back(to_json(s));
        all = all && s.passed;
    }
    j["suites"] = arr;
    j["all_passed"] = all;
    return j;
}

} // namespace gtop
