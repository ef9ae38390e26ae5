#pragma once

// Trajectory CSV and JSON report emission. Numeric fields are printed with
// 17 significant digits so they parse back bit-exact.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include <gtop/charts.hpp>
#include <gtop/convergence.hpp>
#include <gtop/dynamics.hpp>
#include <gtop/stability.hpp>
#include <gtop/trajectory.hpp>

namespace gtop {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline constexpr const char* kTrajectoryCsvHeader = "t,theta,phidot,omega3,nux,nuy,E,gn,L3,Lz,LAz,vA";

/// One row per sample. theta and omega3 are chart-free; phidot, nux and nuy
/// are left blank where |sin theta| is inside the singularity guard rather
/// than printing chart-invalid numbers.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                                 const PhysicalParams& p) {
    out << kTrajectoryCsvHeader << '\n';
    for (const TrajectorySample& s : traj.samples) {
        const double sin_theta = std::hypot(s.state.axis.x, s.state.axis.y);
        const double theta = std::atan2(sin_theta, s.state.axis.z);
        const double omega3 = s.scalars.L3 / p.I3;

        std::string phidot, nux, nuy;
        if (sin_theta >= p.sin_guard) {
            const EulerWithAzimuth eu = vector_to_euler(s.state, p);
            phidot = format_g17(eu.state.phidot);
            nux = format_g17(eu.state.nux);
            nuy = format_g17(eu.state.nuy);
        }
        out << format_g17(s.t) << ',' << format_g17(theta) << ',' << phidot << ','
            << format_g17(omega3) << ',' << nux << ',' << nuy << ','
            << format_g17(s.scalars.energy) << ',' << format_g17(s.scalars.gn) << ','
            << format_g17(s.scalars.L3) << ',' << format_g17(s.scalars.Lz) << ','
            << format_g17(s.scalars.LAz) << ',' << format_g17(s.scalars.vA_norm) << '\n';
    }
}

/// Worst-case invariant violations over one trajectory.
struct InvariantDrifts {
    double L3_rel_max = 0.0;          ///< max |L3(t) - L3(0)| / |L3(0)|
    double energy_increase_max = 0.0; ///< max positive sample-to-sample energy jump [J]
    double vAz_max = 0.0;             ///< max reconstructed vertical tip speed [m/s]
    double axis_norm_drift_max = 0.0; ///< max | |axis| - 1 |
};

inline InvariantDrifts compute_drifts(const Trajectory& traj, const PhysicalParams& p) {
    InvariantDrifts d;
    if (traj.samples.empty()) return d;
    const double L30 = traj.samples.front().scalars.L3;
    const double L3_scale = std::max(std::abs(L30), 1e-300);
    double prev_energy = traj.samples.front().scalars.energy;
    for (const TrajectorySample& s : traj.samples) {
        d.L3_rel_max = std::max(d.L3_rel_max, std::abs(s.scalars.L3 - L30) / L3_scale);
        d.energy_increase_max = std::max(d.energy_increase_max, s.scalars.energy - prev_energy);
        prev_energy = s.scalars.energy;
        d.vAz_max = std::max(d.vAz_max, std::abs(vertical_tip_speed(s.state, p)));
        d.axis_norm_drift_max =
            std::max(d.axis_norm_drift_max, std::abs(norm(s.state.axis) - 1.0));
    }
    d.energy_increase_max = std::max(d.energy_increase_max, 0.0);
    return d;
}

inline nlohmann::json to_json(const Termination& t) {
    nlohmann::json j;
    j["kind"] = to_string(t.kind);
    j["t"] = t.t;
    if (t.kind == TerminationKind::Converged) j["limit"] = to_string(t.limit);
    return j;
}

inline nlohmann::json to_json(const ConvergenceResult& r) {
    return {{"limit", to_string(r.limit)},
            {"t_converged", r.t_converged},
            {"residuals",
             {{"gliding_speed", r.residuals.gliding_speed},
              {"transverse_rate", r.residuals.transverse_rate},
              {"axis_gap", r.residuals.axis_gap}}}};
}

inline nlohmann::json to_json(const StabilityReport& r) {
    return {{"LA3", r.LA3},
            {"threshold", r.threshold},
            {"upright_stable", r.upright_stable},
            {"inverted_stable", r.inverted_stable},
            {"e2_curvature_up", r.e2_curvature_up},
            {"e2_curvature_down", r.e2_curvature_down}};
}

inline nlohmann::json to_json(const InvariantDrifts& d) {
    return {{"L3_rel_max", d.L3_rel_max},
            {"energy_increase_max", d.energy_increase_max},
            {"vAz_max", d.vAz_max},
            {"axis_norm_drift_max", d.axis_norm_drift_max}};
}

inline nlohmann::json build_run_report(const Trajectory& traj, const PhysicalParams& p,
                                       const ConvergenceResult& conv,
                                       const StabilityReport& stab) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["termination"] = to_json(traj.termination);
    j["convergence"] = to_json(conv);
    j["stability"] = to_json(stab);
    j["drifts"] = to_json(compute_drifts(traj, p));
    j["samples"] = traj.samples.size();
    j["t_final"] = traj.samples.empty() ? 0.0 : traj.samples.back().t;
    return j;
}

} // namespace gtop
