#pragma once

// Finite-time detection of convergence to the two vertical spinning
// solutions. The limits are asymptotic, so detection needs explicit cutoffs:
// a trailing window of samples must all sit inside the residual thresholds.

#include <cmath>
#include <cstddef>
#include <optional>

#include <gtop/dynamics.hpp>
#include <gtop/params.hpp>
#include <gtop/state.hpp>
#include <gtop/trajectory.hpp>

namespace gtop {

struct ConvergenceSettings {
    double tol_v = 1e-4;    ///< gliding-speed threshold [m/s]
    double tol_axis = 1e-5; ///< threshold on 1 - |axis . zhat|
    int window = 20;        ///< trailing samples that must qualify
};

struct ConvergenceResiduals {
    double gliding_speed = 0.0;   ///< |v_A| [m/s]
    double transverse_rate = 0.0; ///< |L x e3| / I1 [rad/s]
    double axis_gap = 0.0;        ///< 1 - |axis . zhat|
};

inline ConvergenceResiduals convergence_residuals(const VectorState& s, const PhysicalParams& p) {
    ConvergenceResiduals r;
    r.gliding_speed = norm(gliding_velocity(s, p));
    r.transverse_rate = norm(cross(s.L, s.axis)) / p.I1;
    r.axis_gap = 1.0 - std::abs(dot(s.axis, kZHat));
    return r;
}

struct ConvergenceResult {
    Limit limit = Limit::Undetermined;
    double t_converged = 0.0; ///< first sample of the qualifying window
    ConvergenceResiduals residuals; ///< residuals at the last inspected sample
};

/// Streaming window check, fed one sample at a time by the integrator.
class ConvergenceMonitor {
  public:
    ConvergenceMonitor(ConvergenceSettings settings, const PhysicalParams& params)
        : settings_(settings), params_(params) {}

    struct Detection {
        Limit limit;
        double t_window_start;
    };

    /// Returns a detection once `window` consecutive samples qualified for
    /// the same limit.
    [[nodiscard]] std::optional<Detection> feed(double t, const VectorState& s) {
        const ConvergenceResiduals r = convergence_residuals(s, params_);
        const Limit here = classify(r, s);
        if (here == Limit::Undetermined || here != run_limit_) {
            run_limit_ = here;
            run_length_ = 0;
            run_start_t_ = t;
        }
        if (here != Limit::Undetermined) {
            if (run_length_ == 0) run_start_t_ = t;
            ++run_length_;
            if (run_length_ >= settings_.window) return Detection{here, run_start_t_};
        }
        return std::nullopt;
    }

    void reset() {
        run_limit_ = Limit::Undetermined;
        run_length_ = 0;
    }

  private:
    Limit classify(const ConvergenceResiduals& r, const VectorState& s) const {
        const bool rates_small = r.gliding_speed < settings_.tol_v &&
                                 r.transverse_rate < settings_.tol_v / params_.l;
        if (!rates_small || r.axis_gap >= settings_.tol_axis) return Limit::Undetermined;
        return dot(s.axis, kZHat) > 0.0 ? Limit::Upright : Limit::Inverted;
    }

    ConvergenceSettings settings_;
    PhysicalParams params_;
    Limit run_limit_ = Limit::Undetermined;
    int run_length_ = 0;
    double run_start_t_ = 0.0;
};

/// Post-hoc detection over a whole trajectory. Trajectories cut short by
/// contact loss or a degenerate denominator stay Undetermined.
inline ConvergenceResult detect_convergence(const Trajectory& traj, const PhysicalParams& params,
                                            const ConvergenceSettings& settings = {}) {
    ConvergenceResult out;
    if (traj.samples.empty()) return out;
    out.residuals = convergence_residuals(traj.samples.back().state, params);

    if (traj.termination.kind == TerminationKind::ContactLoss ||
        traj.termination.kind == TerminationKind::DegenerateDenominator)
        return out;

    ConvergenceMonitor monitor(settings, params);
    for (const TrajectorySample& sample : traj.samples) {
        if (auto det = monitor.feed(sample.t, sample.state)) {
            out.limit = det->limit;
            out.t_converged = det->t_window_start;
            return out;
        }
    }
    return out;
}

} // namespace gtop
