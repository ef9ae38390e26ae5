// Integrator tests: fixed-step reference order, adaptive trajectory
// invariants, conservation in the frictionless limit, event localization,
// dense-output consistency and the finite-difference rate-law oracles.

#include <gtest/gtest.h>

#include <atomic>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include <gtop/charts.hpp>
#include <gtop/integrate.hpp>

#include "support/oracles.hpp"

using namespace gtop;
using gtop::testsupport::default_params;
using gtop::testsupport::fd3;
using gtop::testsupport::fd5;
using gtop::testsupport::state_distance;

namespace {

VectorState tumbling_start(const PhysicalParams& p) {
    EulerState e;
    e.theta = 2.2;
    e.thetadot = -0.7;
    e.phidot = 3.0;
    e.omega3 = 40.0;
    e.nux = 0.2;
    e.nuy = -0.1;
    return euler_to_vector(e, 0.0, p);
}

IntegratorConfig tight_config(double t_end, double sample_dt) {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    cfg.t_end = t_end;
    cfg.sample_dt = sample_dt;
    cfg.detect_convergence = false;
    return cfg;
}

} // namespace

// ===========================================================================
// Fixed-step reference stepper
// ===========================================================================

TEST(FixedRk4, ConsistentWithTheRateField) {
    const PhysicalParams p = default_params();
    const FrictionModel fric = FrictionModel::constant(0.3);
    const VectorState s = tumbling_start(p);
    const VectorRate rate = derivatives_vector(s, p, fric).rate;

    // (step(s, h) - s)/h approaches f(s): the defect is O(h) and halves with h.
    double prev_defect = -1.0;
    for (double h : {1e-4, 5e-5, 2.5e-5}) {
        const VectorState stepped = step_fixed_rk4(s, h, p, fric);
        const VectorState euler{s.rdot + h * rate.rddot, s.L + h * rate.Ldot,
                                s.axis + h * rate.axis_dot};
        const double defect = state_distance(stepped, euler) / h;
        if (prev_defect > 0.0) {
            EXPECT_GT(prev_defect / defect, 1.9);
            EXPECT_LT(prev_defect / defect, 2.1);
        }
        prev_defect = defect;
        EXPECT_LT(defect, 100.0 * h);
    }
}

TEST(FixedRk4, FourthOrderGlobalError) {
    const PhysicalParams p = default_params();
    const FrictionModel fric = FrictionModel::constant(0.0);
    const VectorState s0 = tumbling_start(p);

    const auto endpoint = [&](double h) {
        VectorState s = s0;
        const long n = std::lround(1.0 / h);
        for (long i = 0; i < n; ++i) s = step_fixed_rk4(s, h, p, fric);
        return s;
    };
    const VectorState ref = endpoint(1.0 / 1024000.0);

    double prev = -1.0;
    for (int k = 0; k < 4; ++k) {
        const double err = state_distance(endpoint(1e-3 / (1 << k)), ref);
        if (prev > 0.0) {
            const double factor = prev / err;
            EXPECT_GT(factor, 12.0);
            EXPECT_LT(factor, 22.0);
        }
        prev = err;
    }
}

TEST(FixedRk4, FixedPointMapsToItself) {
    const PhysicalParams p = default_params();
    const VectorState up{{0.0, 0.0}, {0.0, 0.0, p.I3 * 100.0}, {0.0, 0.0, 1.0}};
    const VectorState out = step_fixed_rk4(up, 0.01, p, FrictionModel::constant(0.3));
    EXPECT_EQ(out.rdot.x, up.rdot.x);
    EXPECT_EQ(out.L.z, up.L.z);
    EXPECT_EQ(out.axis.z, up.axis.z);
    EXPECT_EQ(state_distance(out, up), 0.0);
}

TEST(FixedRk4, RejectsNonPositiveStep) {
    const PhysicalParams p = default_params();
    EXPECT_THROW(step_fixed_rk4(tumbling_start(p), 0.0, p, FrictionModel::constant(0.0)),
                 std::invalid_argument);
}

// ===========================================================================
// Adaptive integration
// ===========================================================================

TEST(Integrate, FixedPointTrajectoryIsConstant) {
    const PhysicalParams p = default_params();
    const VectorState up{{0.0, 0.0}, {0.0, 0.0, p.I3 * 150.0}, {0.0, 0.0, 1.0}};
    const Trajectory traj =
        integrate(up, p, FrictionModel::constant(0.3), tight_config(2.0, 0.05));
    ASSERT_EQ(traj.termination.kind, TerminationKind::TimeEnd);
    ASSERT_GE(traj.samples.size(), 40u);
    for (const auto& s : traj.samples) {
        EXPECT_EQ(state_distance(s.state, up), 0.0);
        EXPECT_NEAR(s.scalars.gn, p.m * p.g, 1e-13);
    }
}

TEST(Integrate, FixedPointConvergesAtFirstFullWindow) {
    const PhysicalParams p = default_params();
    const VectorState up{{0.0, 0.0}, {0.0, 0.0, p.I3 * 150.0}, {0.0, 0.0, 1.0}};
    IntegratorConfig cfg = tight_config(10.0, 0.05);
    cfg.detect_convergence = true;
    ConvergenceSettings conv;
    const Trajectory traj = integrate(up, p, FrictionModel::constant(0.3), cfg, conv);
    ASSERT_EQ(traj.termination.kind, TerminationKind::Converged);
    EXPECT_EQ(traj.termination.limit, Limit::Upright);
    // Window of 20 samples at 0.05 s cadence, starting from the t=0 sample.
    EXPECT_NEAR(traj.termination.t, 0.05 * (conv.window - 1), 1e-12);
    const ConvergenceResult res = detect_convergence(traj, p, conv);
    EXPECT_EQ(res.limit, Limit::Upright);
    EXPECT_EQ(res.t_converged, 0.0);
}

TEST(Integrate, FrictionlessRunConservesEnergyAndVerticalMomentum) {
    const PhysicalParams p = default_params();
    const Trajectory traj =
        integrate(tumbling_start(p), p, FrictionModel::constant(0.0), tight_config(10.0, 0.01));
    ASSERT_EQ(traj.termination.kind, TerminationKind::TimeEnd);
    const double E0 = traj.samples.front().scalars.energy;
    const double Lz0 = traj.samples.front().scalars.Lz;
    double dE = 0.0, dLz = 0.0;
    for (const auto& s : traj.samples) {
        dE = std::max(dE, std::abs(s.scalars.energy - E0) / std::abs(E0));
        dLz = std::max(dLz, std::abs(s.scalars.Lz - Lz0) / std::abs(Lz0));
    }
    EXPECT_LT(dE, 1e-8);
    EXPECT_LT(dLz, 1e-8);
}

TEST(Integrate, DissipativeRunRespectsTrajectoryInvariants) {
    const PhysicalParams p = default_params();
    const Trajectory traj =
        integrate(tumbling_start(p), p, FrictionModel::constant(0.3), tight_config(5.0, 1e-3));
    ASSERT_EQ(traj.termination.kind, TerminationKind::TimeEnd);

    const double eps_E = 1e-8 * (1.0 + std::abs(traj.samples.front().scalars.energy));
    double prev_t = -1.0, prev_E = 0.0;
    bool first = true;
    for (const auto& s : traj.samples) {
        EXPECT_GT(s.t, prev_t); // strictly increasing times
        prev_t = s.t;
        EXPECT_GE(s.scalars.gn, 0.0);
        EXPECT_LT(std::abs(norm(s.state.axis) - 1.0), 1e-9);
        EXPECT_LT(std::abs(vertical_tip_speed(s.state, p)), 1e-9);
        if (!first) {
            EXPECT_LE(s.scalars.energy, prev_E + eps_E);
            if (s.scalars.vA_norm > 1e-3) EXPECT_LT(s.scalars.energy, prev_E);
        }
        prev_E = s.scalars.energy;
        first = false;
    }
}

TEST(Integrate, ContactLossIsLocalizedOnTheDenseOutput) {
    const PhysicalParams p = default_params();
    // Energetic upswing toward vertical: the reaction force crosses zero.
    EulerState e;
    e.theta = 1.3;
    e.thetadot = -14.0;
    e.omega3 = 5.0;
    const VectorState v0 = euler_to_vector(e, 0.0, p);
    ASSERT_GT(normal_force_vector(v0, p, 0.3), 0.0);

    const Trajectory traj =
        integrate(v0, p, FrictionModel::constant(0.3), tight_config(2.0, 1e-3));
    ASSERT_EQ(traj.termination.kind, TerminationKind::ContactLoss);
    EXPECT_GT(traj.termination.t, 0.0);
    EXPECT_LT(traj.termination.t, 0.1);

    // Event sample is the last one; |gn| there is within the localization bound.
    const auto& last = traj.samples.back();
    EXPECT_NEAR(last.t, traj.termination.t, 1e-12);
    EXPECT_LT(std::abs(last.scalars.gn), 1e-8 * p.m * p.g);
    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i)
        EXPECT_GE(traj.samples[i].scalars.gn, 0.0);

    // A ContactLoss trajectory never reports a limit.
    EXPECT_EQ(detect_convergence(traj, p).limit, Limit::Undetermined);
}

TEST(Integrate, DegenerateDenominatorIsRecordedNotThrown) {
    const PhysicalParams p = default_params();
    // Friction model that makes the constraint solve singular after a while;
    // the integrator must record the termination instead of crashing.
    auto count = std::make_shared<std::atomic<long>>(0);
    const FrictionModel fric(
        [count](const VectorState&) -> double {
            if (count->fetch_add(1) > 5000)
                throw DegenerateDenominator("injected singular constraint");
            return 0.3;
        },
        [](const EulerState&) { return 0.3; });

    const Trajectory traj = integrate(tumbling_start(p), p, fric, tight_config(5.0, 1e-3));
    EXPECT_EQ(traj.termination.kind, TerminationKind::DegenerateDenominator);
    EXPECT_GT(traj.termination.t, 0.0);
    EXPECT_EQ(detect_convergence(traj, p).limit, Limit::Undetermined);
}

TEST(Integrate, RejectsInvalidInitialStates) {
    const PhysicalParams p = default_params();
    const FrictionModel fric = FrictionModel::constant(0.3);
    VectorState bad_axis = tumbling_start(p);
    bad_axis.axis = 2.0 * bad_axis.axis;
    EXPECT_THROW(integrate(bad_axis, p, fric, tight_config(1.0, 0.01)), std::invalid_argument);

    // Initial state with negative reaction force violates the precondition.
    EulerState e;
    e.theta = 0.3;
    e.thetadot = 12.0;
    const VectorState pushed = euler_to_vector(e, 0.0, p);
    ASSERT_LT(normal_force_vector(pushed, p, 0.3), 0.0);
    EXPECT_THROW(integrate(pushed, p, fric, tight_config(1.0, 0.01)), std::invalid_argument);
}

TEST(Integrate, DenseSamplesMatchAShortRestart) {
    const PhysicalParams p = default_params();
    const IntegratorConfig cfg = tight_config(2.0, 0.0107); // cadence incommensurate with steps
    const FrictionModel fric = FrictionModel::constant(0.3);
    const Trajectory traj = integrate(tumbling_start(p), p, fric, cfg);
    ASSERT_GT(traj.samples.size(), 20u);

    std::mt19937_64 rng(41);
    std::uniform_int_distribution<std::size_t> pick(1, traj.samples.size() - 2);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t k = pick(rng);
        const auto& from = traj.samples[k - 1];
        const auto& to = traj.samples[k];
        IntegratorConfig restart = cfg;
        restart.t_end = to.t - from.t;
        restart.sample_dt = restart.t_end;
        const Trajectory leg = integrate(from.state, p, fric, restart);
        const VectorState& end = leg.samples.back().state;
        const auto within = [&](double a, double b) {
            EXPECT_NEAR(a, b, 10.0 * (cfg.abs_tol + cfg.rel_tol * std::max(std::abs(a), std::abs(b))));
        };
        within(end.rdot.x, to.state.rdot.x);
        within(end.rdot.y, to.state.rdot.y);
        within(end.L.x, to.state.L.x);
        within(end.L.y, to.state.L.y);
        within(end.L.z, to.state.L.z);
        within(end.axis.x, to.state.axis.x);
        within(end.axis.y, to.state.axis.y);
        within(end.axis.z, to.state.axis.z);
    }
}

TEST(Integrate, ExplicitInitialStepMatchesAutomaticSelection) {
    const PhysicalParams p = default_params();
    const FrictionModel fric = FrictionModel::constant(0.3);
    IntegratorConfig auto_cfg = tight_config(1.0, 0.1);
    IntegratorConfig manual_cfg = auto_cfg;
    manual_cfg.h_init = 2e-4;
    const Trajectory a = integrate(tumbling_start(p), p, fric, auto_cfg);
    const Trajectory b = integrate(tumbling_start(p), p, fric, manual_cfg);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    // Both paths land on the same solution to within the tolerance budget.
    EXPECT_LT(state_distance(a.samples.back().state, b.samples.back().state), 1e-9);
}

TEST(ConvergenceMonitor, WindowResetsWhenTheCandidateLimitFlips) {
    const PhysicalParams p = default_params();
    ConvergenceSettings settings;
    settings.window = 3;
    ConvergenceMonitor monitor(settings, p);

    const VectorState up{{0.0, 0.0}, {0.0, 0.0, p.I3 * 50.0}, {0.0, 0.0, 1.0}};
    const VectorState down{{0.0, 0.0}, {0.0, 0.0, -p.I3 * 50.0}, {0.0, 0.0, -1.0}};
    VectorState wandering = up;
    wandering.axis = normalized({0.5, 0.0, 0.8});
    wandering.L = p.I3 * 50.0 * wandering.axis;

    EXPECT_FALSE(monitor.feed(0.0, up).has_value());
    EXPECT_FALSE(monitor.feed(1.0, up).has_value());
    EXPECT_FALSE(monitor.feed(2.0, down).has_value()); // flip resets the run
    EXPECT_FALSE(monitor.feed(3.0, down).has_value());
    EXPECT_FALSE(monitor.feed(4.0, wandering).has_value()); // disqualified state resets
    EXPECT_FALSE(monitor.feed(5.0, down).has_value());
    EXPECT_FALSE(monitor.feed(6.0, down).has_value());
    const auto det = monitor.feed(7.0, down);
    ASSERT_TRUE(det.has_value());
    EXPECT_EQ(det->limit, Limit::Inverted);
    EXPECT_EQ(det->t_window_start, 5.0);
}

TEST(Integrate, ConvergenceDetectionTerminatesInvertedRuns) {
    const PhysicalParams p = default_params();
    EulerState e;
    e.theta = 0.9;
    e.phidot = 5.0;
    e.omega3 = -40.0;
    const VectorState v0 = euler_to_vector(e, 0.0, p);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-9;
    cfg.abs_tol = 1e-12;
    cfg.t_end = 60.0;
    cfg.sample_dt = 0.02;
    const Trajectory traj = integrate(v0, p, FrictionModel::constant(0.3), cfg);
    ASSERT_EQ(traj.termination.kind, TerminationKind::Converged);
    EXPECT_EQ(traj.termination.limit, Limit::Inverted);
    const ConvergenceResult res = detect_convergence(traj, p);
    EXPECT_EQ(res.limit, Limit::Inverted);
    EXPECT_LE(res.t_converged, traj.termination.t);
    EXPECT_LT(res.residuals.gliding_speed, 1e-4);
    EXPECT_LT(res.residuals.axis_gap, 1e-5);
}

// ===========================================================================
// Finite-difference oracles for the two rate laws
// ===========================================================================

namespace {

struct SampledRun {
    std::vector<double> energy, Lz, edot_formula, lzdot_formula, vA, nuy;
    double dt = 0.0;
};

SampledRun sample_run(const PhysicalParams& p, double mu, double dt, double t_end) {
    EulerState e;
    e.theta = 1.1;
    e.thetadot = 1.0;
    e.phidot = 2.0;
    e.omega3 = 50.0;
    e.nux = 0.3;
    e.nuy = -0.2;
    const FrictionModel fric = FrictionModel::constant(mu);
    IntegratorConfig cfg = tight_config(t_end, dt);
    const Trajectory traj = integrate(euler_to_vector(e, 0.0, p), p, fric, cfg);
    SampledRun out;
    out.dt = dt;
    for (const auto& s : traj.samples) {
        if (std::hypot(s.state.axis.x, s.state.axis.y) < 1e-6) break;
        const EulerWithAzimuth eu = vector_to_euler(s.state, p);
        out.energy.push_back(s.scalars.energy);
        out.Lz.push_back(s.scalars.Lz);
        out.edot_formula.push_back(s.scalars.Edot);
        out.lzdot_formula.push_back(p.l * mu * s.scalars.gn * eu.state.nuy *
                                    std::sin(eu.state.theta));
        out.vA.push_back(s.scalars.vA_norm);
        out.nuy.push_back(eu.state.nuy);
    }
    return out;
}

/// Max |fd3 - formula| over the series subsampled by `stride`.
template <typename Pick>
double fd3_worst(const SampledRun& run, const std::vector<double>& series,
                 const std::vector<double>& formula, int stride, Pick eligible) {
    double worst = 0.0;
    std::vector<double> sub;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < series.size(); i += static_cast<std::size_t>(stride)) {
        sub.push_back(series[i]);
        idx.push_back(i);
    }
    for (std::size_t j = 1; j + 1 < sub.size(); ++j) {
        if (!eligible(idx[j])) continue;
        const double fd = fd3(sub, j, run.dt * stride);
        worst = std::max(worst, std::abs(fd - formula[idx[j]]));
    }
    return worst;
}

} // namespace

TEST(RateLaws, DissipationIdentityConvergesAtSecondOrder) {
    const PhysicalParams p = default_params();
    const SampledRun run = sample_run(p, 0.3, 5e-4, 3.0);
    ASSERT_GT(run.energy.size(), 100u);
    const auto always = [](std::size_t) { return true; };
    const double e4 = fd3_worst(run, run.energy, run.edot_formula, 4, always);
    const double e2 = fd3_worst(run, run.energy, run.edot_formula, 2, always);
    const double e1 = fd3_worst(run, run.energy, run.edot_formula, 1, always);
    // Second-order convergence: each halving of the FD step cuts the error
    // by about four.
    EXPECT_GT(e4 / e2, 3.0);
    EXPECT_LT(e4 / e2, 5.5);
    EXPECT_GT(e2 / e1, 3.0);
    EXPECT_LT(e2 / e1, 5.5);
}

TEST(RateLaws, DissipationIdentityPointwise) {
    const PhysicalParams p = default_params();
    const SampledRun run = sample_run(p, 0.3, 5e-4, 3.0);
    long checked = 0;
    for (std::size_t i = 2; i + 2 < run.energy.size(); ++i) {
        if (run.vA[i] < 1e-3) continue;
        const double fd = fd5(run.energy, i, run.dt);
        EXPECT_NEAR(fd, run.edot_formula[i], 1e-5 * std::abs(run.edot_formula[i]));
        ++checked;
    }
    EXPECT_GT(checked, 1000);
}

TEST(RateLaws, VerticalMomentumRateConvergesAtSecondOrder) {
    const PhysicalParams p = default_params();
    const SampledRun run = sample_run(p, 0.3, 5e-4, 3.0);
    const auto always = [](std::size_t) { return true; };
    const double e4 = fd3_worst(run, run.Lz, run.lzdot_formula, 4, always);
    const double e2 = fd3_worst(run, run.Lz, run.lzdot_formula, 2, always);
    const double e1 = fd3_worst(run, run.Lz, run.lzdot_formula, 1, always);
    EXPECT_GT(e4 / e2, 3.0);
    EXPECT_LT(e4 / e2, 5.5);
    EXPECT_GT(e2 / e1, 3.0);
    EXPECT_LT(e2 / e1, 5.5);
}

TEST(RateLaws, VerticalMomentumRatePointwise) {
    const PhysicalParams p = default_params();
    const SampledRun run = sample_run(p, 0.3, 5e-4, 3.0);
    long checked = 0;
    for (std::size_t i = 2; i + 2 < run.Lz.size(); ++i) {
        if (std::abs(run.nuy[i]) < 1e-3) continue;
        const double fd = fd5(run.Lz, i, run.dt);
        EXPECT_NEAR(fd, run.lzdot_formula[i], 1e-5 * std::abs(run.lzdot_formula[i]));
        ++checked;
    }
    EXPECT_GT(checked, 500);
}
