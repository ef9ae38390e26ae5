#pragma once

// Adaptive trajectory integration in the vector chart.
//
// Embedded Dormand-Prince 5(4) pair with the standard fourth-order dense
// output and PI step-size control. The symmetry axis is rescaled to unit
// norm after every accepted step; within a step the RHS sees the
// unconstrained ODE, so the dense interpolant stays consistent with the
// stages that produced it.
//
// Termination events:
//   * TimeEnd               t_end reached
//   * ContactLoss           gn crossed zero; localized on the dense output
//   * Converged             the analysis window predicate held
//   * DegenerateDenominator reaction-force equation singular (recorded, not thrown)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

#include <gtop/convergence.hpp>
#include <gtop/dynamics.hpp>
#include <gtop/errors.hpp>
#include <gtop/friction.hpp>
#include <gtop/params.hpp>
#include <gtop/state.hpp>
#include <gtop/trajectory.hpp>

namespace gtop {

namespace detail {

using StateVec = std::array<double, 8>;

inline StateVec pack(const VectorState& s) {
    return {s.rdot.x, s.rdot.y, s.L.x, s.L.y, s.L.z, s.axis.x, s.axis.y, s.axis.z};
}

inline VectorState unpack(const StateVec& y) {
    VectorState s;
    s.rdot = {y[0], y[1]};
    s.L = {y[2], y[3], y[4]};
    s.axis = {y[5], y[6], y[7]};
    return s;
}

inline StateVec pack_rate(const VectorRate& r) {
    return {r.rddot.x,   r.rddot.y,   r.Ldot.x,     r.Ldot.y,
            r.Ldot.z,    r.axis_dot.x, r.axis_dot.y, r.axis_dot.z};
}

inline void renormalize_axis(StateVec& y) {
    const double n = std::sqrt(y[5] * y[5] + y[6] * y[6] + y[7] * y[7]);
    y[5] /= n;
    y[6] /= n;
    y[7] /= n;
}

// Dormand-Prince 5(4) tableau (FSAL layout: the 7th stage sits at the
// 5th-order solution).
inline constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kA2[1] = {1.0 / 5};
inline constexpr double kA3[2] = {3.0 / 40, 9.0 / 40};
inline constexpr double kA4[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
inline constexpr double kA5[4] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
inline constexpr double kA6[5] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                                  -5103.0 / 18656};
inline constexpr double kB[6] = {35.0 / 384,     0.0,        500.0 / 1113,
                                 125.0 / 192,    -2187.0 / 6784, 11.0 / 84};
// b - bhat, including the 7th (FSAL) stage.
inline constexpr double kE[7] = {71.0 / 57600, 0.0,           -71.0 / 16695, 71.0 / 1920,
                                 -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
// Weights of the quartic continuous extension.
inline constexpr double kD[7] = {-12715105075.0 / 11282082432.0,
                                 0.0,
                                 87487479700.0 / 32700410799.0,
                                 -10690763975.0 / 1880347072.0,
                                 701980252875.0 / 199316789632.0,
                                 -1453857185.0 / 822651844.0,
                                 69997945.0 / 29380423.0};

/// Quartic Hermite-style interpolant over one accepted step.
struct DenseOutput {
    double t0 = 0.0, h = 0.0;
    StateVec r1{}, r2{}, r3{}, r4{}, r5{};

    StateVec eval(double t) const {
        const double s = (t - t0) / h;
        const double s1 = 1.0 - s;
        StateVec out;
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
        return out;
    }
};

} // namespace detail

/// One classical fourth-order Runge-Kutta step. Reference stepper for the
/// convergence-order oracles and short property-scan integrations; the axis
/// is left unnormalized so the map stays a plain RK4 flow approximation.
inline VectorState step_fixed_rk4(const VectorState& state, double h, const PhysicalParams& p,
                                  const FrictionModel& friction) {
    if (!(h > 0.0)) throw std::invalid_argument("step_fixed_rk4: h must be > 0");
    using detail::StateVec;
    const auto f = [&](const StateVec& y) {
        return detail::pack_rate(derivatives_vector(detail::unpack(y), p, friction).rate);
    };
    const StateVec y0 = detail::pack(state);
    const StateVec k1 = f(y0);
    StateVec tmp;
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = y0[i] + 0.5 * h * k1[i];
    const StateVec k2 = f(tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = y0[i] + 0.5 * h * k2[i];
    const StateVec k3 = f(tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = y0[i] + h * k3[i];
    const StateVec k4 = f(tmp);
    StateVec y1;
    for (std::size_t i = 0; i < y1.size(); ++i)
        y1[i] = y0[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return detail::unpack(y1);
}

/// Advance a trajectory until t_end, contact loss, convergence, or a
/// degenerate constraint denominator.
inline Trajectory integrate(const VectorState& initial, const PhysicalParams& params,
                            const FrictionModel& friction, const IntegratorConfig& cfg,
                            const ConvergenceSettings& conv = {}) {
    using detail::StateVec;
    cfg.validate();

    VectorState start = initial;
    if (std::abs(norm(start.axis) - 1.0) > 1e-6)
        throw std::invalid_argument("integrate: initial axis is not unit length");
    start.axis = normalized(start.axis);

    if (normal_force_vector(start, params, friction(start)) < 0.0)
        throw std::invalid_argument("integrate: initial reaction force is negative");

    Trajectory traj;
    ConvergenceMonitor monitor(conv, params);

    const auto rhs = [&](const StateVec& y) {
        return detail::pack_rate(derivatives_vector(detail::unpack(y), params, friction).rate);
    };
    const auto gn_at = [&](const VectorState& s) {
        return normal_force_vector(s, params, friction(s));
    };

    // Appends a sample; returns a detected limit once the window fills.
    const auto emit = [&](double t, const VectorState& s) -> std::optional<Termination> {
        traj.samples.push_back({t, s, monitored_scalars(s, params, friction)});
        if (cfg.detect_convergence) {
            if (auto det = monitor.feed(t, s))
                return Termination{TerminationKind::Converged, t, det->limit};
        }
        return std::nullopt;
    };

    // Bisect a gn sign change inside one step's dense output down to 1e-10 s.
    const auto localize_contact_loss = [&](const detail::DenseOutput& dense, double lo,
                                           double hi) {
        for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
            const double mid = 0.5 * (lo + hi);
            StateVec ym = dense.eval(mid);
            detail::renormalize_axis(ym);
            if (gn_at(detail::unpack(ym)) < 0.0)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    };

    double t = 0.0;
    StateVec y = detail::pack(start);

    if (auto term = emit(0.0, start)) {
        traj.termination = *term;
        return traj;
    }
    long next_sample = 1;

    // PI controller constants (Hairer's dopri5 settings).
    constexpr double kSafe = 0.9, kBeta = 0.04, kExpo = 0.2 - 0.75 * kBeta;
    constexpr double kMaxGrow = 10.0, kMaxShrink = 0.2;
    double facold = 1e-4;
    bool last_rejected = false;

    StateVec k[7];
    try {
        k[0] = rhs(y);
    } catch (const DegenerateDenominator&) {
        traj.termination = {TerminationKind::DegenerateDenominator, t, Limit::Undetermined};
        return traj;
    }

    // Initial step size: explicit if configured, else the usual two-probe guess.
    double h = cfg.h_init;
    if (!(h > 0.0)) {
        StateVec sc;
        for (std::size_t i = 0; i < sc.size(); ++i)
            sc[i] = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            d0 += (y[i] / sc[i]) * (y[i] / sc[i]);
            d1 += (k[0][i] / sc[i]) * (k[0][i] / sc[i]);
        }
        d0 = std::sqrt(d0 / y.size());
        d1 = std::sqrt(d1 / y.size());
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min({h0, cfg.h_max, cfg.t_end});
        double h1 = h0;
        try {
            StateVec yp;
            for (std::size_t i = 0; i < yp.size(); ++i) yp[i] = y[i] + h0 * k[0][i];
            const StateVec fp = rhs(yp);
            double d2 = 0.0;
            for (std::size_t i = 0; i < fp.size(); ++i) {
                const double df = (fp[i] - k[0][i]) / sc[i];
                d2 += df * df;
            }
            d2 = std::sqrt(d2 / fp.size()) / h0;
            const double der = std::max(d1, d2);
            h1 = (der <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / der, 0.2);
        } catch (const DegenerateDenominator&) {
            // keep h0; the main loop will record the termination
        }
        h = std::min({100.0 * h0, h1, cfg.h_max, cfg.t_end});
    }
    h = std::min({h, cfg.h_max, cfg.t_end});

    constexpr long kMaxSteps = 400'000'000L;
    for (long nstep = 0; t < cfg.t_end; ++nstep) {
        if (nstep >= kMaxSteps) throw std::runtime_error("integrate: step budget exhausted");
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw std::runtime_error("integrate: step size underflow");
        bool last = false;
        if (t + h >= cfg.t_end) {
            h = cfg.t_end - t;
            last = true;
        }

        StateVec y1;
        bool degenerate = false;
        try {
            k[0] = rhs(y);
            StateVec tmp;
            const auto stage = [&](const double* a, int n, int out) {
                for (std::size_t i = 0; i < tmp.size(); ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < n; ++j) acc += a[j] * k[j][i];
                    tmp[i] = y[i] + h * acc;
                }
                k[out] = rhs(tmp);
            };
            stage(detail::kA2, 1, 1);
            stage(detail::kA3, 2, 2);
            stage(detail::kA4, 3, 3);
            stage(detail::kA5, 4, 4);
            stage(detail::kA6, 5, 5);
            for (std::size_t i = 0; i < y1.size(); ++i) {
                double acc = 0.0;
                for (int j = 0; j < 6; ++j) acc += detail::kB[j] * k[j][i];
                y1[i] = y[i] + h * acc;
            }
            k[6] = rhs(y1);
        } catch (const DegenerateDenominator&) {
            degenerate = true;
        }
        if (degenerate) {
            traj.termination = {TerminationKind::DegenerateDenominator, t, Limit::Undetermined};
            return traj;
        }

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < y.size(); ++i) {
            double e = 0.0;
            for (int j = 0; j < 7; ++j) e += detail::kE[j] * k[j][i];
            e *= h;
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err += (e / sc) * (e / sc);
            finite = finite && std::isfinite(y1[i]);
        }
        err = std::sqrt(err / y.size());

        if (!finite || !std::isfinite(err)) {
            h *= 0.1;
            last_rejected = true;
            continue;
        }
        if (err > 1.0) {
            const double fac =
                std::clamp(kSafe * std::pow(err, -0.2), kMaxShrink, 1.0);
            h *= fac;
            last_rejected = true;
            continue;
        }

        // Accepted. Build the dense interpolant before touching the state.
        detail::DenseOutput dense;
        dense.t0 = t;
        dense.h = h;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double dy = y1[i] - y[i];
            double acc = 0.0;
            for (int j = 0; j < 7; ++j) acc += detail::kD[j] * k[j][i];
            dense.r1[i] = y[i];
            dense.r2[i] = dy;
            dense.r3[i] = h * k[0][i] - dy;
            dense.r4[i] = dy - h * k[6][i] - dense.r3[i];
            dense.r5[i] = h * acc;
        }
        const double t1 = t + h;

        // Emit cadence samples in (t, t1], watching gn and the convergence
        // window as we go.
        double last_ok_t = t;
        bool terminated = false;
        while (true) {
            double ts = static_cast<double>(next_sample) * cfg.sample_dt;
            const bool endpoint_check = ts > t1 + 1e-12 * std::max(1.0, t1);
            if (endpoint_check) ts = t1;

            StateVec ys = endpoint_check ? y1 : dense.eval(ts);
            detail::renormalize_axis(ys);
            const VectorState state_s = detail::unpack(ys);

            double gn_s;
            try {
                gn_s = gn_at(state_s);
            } catch (const DegenerateDenominator&) {
                traj.termination = {TerminationKind::DegenerateDenominator, ts,
                                    Limit::Undetermined};
                return traj;
            }
            if (gn_s < 0.0) {
                const double t_event = localize_contact_loss(dense, last_ok_t, ts);
                StateVec ye = dense.eval(t_event);
                detail::renormalize_axis(ye);
                const VectorState state_e = detail::unpack(ye);
                traj.samples.push_back({t_event, state_e,
                                        monitored_scalars(state_e, params, friction)});
                traj.termination = {TerminationKind::ContactLoss, t_event, Limit::Undetermined};
                return traj;
            }
            last_ok_t = ts;

            if (endpoint_check) break;
            if (auto term = emit(ts, state_s)) {
                traj.termination = *term;
                terminated = true;
                break;
            }
            ++next_sample;
        }
        if (terminated) return traj;

        detail::renormalize_axis(y1);
        y = y1;
        t = t1;

        if (last && t >= cfg.t_end) break;

        // PI step update.
        const double fac11 = std::pow(std::max(err, 1e-300), kExpo);
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::clamp(fac / kSafe, 1.0 / kMaxGrow, 1.0 / kMaxShrink);
        double hnew = h / fac;
        if (last_rejected) hnew = std::min(hnew, h);
        facold = std::max(err, 1e-4);
        last_rejected = false;
        h = std::min(hnew, cfg.h_max);
    }

    // Final sample exactly at t_end unless the cadence already landed there.
    const VectorState final_state = detail::unpack(y);
    if (traj.samples.empty() ||
        std::abs(traj.samples.back().t - cfg.t_end) > 1e-12 * std::max(1.0, cfg.t_end))
        traj.samples.push_back(
            {cfg.t_end, final_state, monitored_scalars(final_state, params, friction)});
    traj.termination = {TerminationKind::TimeEnd, cfg.t_end, Limit::Undetermined};
    return traj;
}

} // namespace gtop
