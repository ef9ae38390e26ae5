#pragma once

// Test-only oracles and helpers. Everything here stays independent of the
// implementation paths it checks: the reaction-force oracle assembles the
// contact constraint from the unreduced equations, and the finite-difference
// helpers operate on sampled series only.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtop/charts.hpp>
#include <gtop/dynamics.hpp>
#include <gtop/params.hpp>
#include <gtop/state.hpp>
#include <gtop/vec.hpp>

namespace gtop::testsupport {

inline PhysicalParams default_params() { return PhysicalParams(1.0, 9.81, 0.1, 0.002, 0.001); }

/// Solves zhat . d2/dt2 (s + a) = 0 for gn by assembling the residual from
/// the unreduced equations of motion; the residual is affine in gn.
inline double gn_constraint_oracle(const VectorState& s, const PhysicalParams& p, double mu) {
    const auto residual = [&](double gn) {
        const Vec2 vA2 = gliding_velocity(s, p);
        const Vec3 vA{vA2.x, vA2.y, 0.0};
        const Vec3 F = -mu * gn * vA + gn * kZHat;
        const double sddot_z = dot(F, kZHat) / p.m - p.g;
        const Vec3 a = -p.l * s.axis;
        const Vec3 Ldot = cross(a, F);
        const Vec3 axis_dot = cross(s.L, s.axis) / p.I1;
        const Vec3 axis_ddot = (cross(Ldot, s.axis) + cross(s.L, axis_dot)) / p.I1;
        return sddot_z - p.l * dot(axis_ddot, kZHat);
    };
    const double r0 = residual(0.0);
    const double r1 = residual(1.0);
    return -r0 / (r1 - r0);
}

struct StateRanges {
    double theta_margin = 0.15;
    double thetadot = 3.0;
    double phidot = 5.0;
    double omega3 = 150.0;
    double nu = 0.5;
};

inline EulerState random_euler(std::mt19937_64& rng, const StateRanges& r = {}) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EulerState e;
    e.theta = r.theta_margin + (std::numbers::pi - 2.0 * r.theta_margin) * u(rng);
    e.thetadot = r.thetadot * (2.0 * u(rng) - 1.0);
    e.phidot = r.phidot * (2.0 * u(rng) - 1.0);
    e.omega3 = r.omega3 * (2.0 * u(rng) - 1.0);
    e.nux = r.nu * (2.0 * u(rng) - 1.0);
    e.nuy = r.nu * (2.0 * u(rng) - 1.0);
    return e;
}

inline double random_phi(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return 2.0 * std::numbers::pi * u(rng);
}

/// Second-order central difference.
inline double fd3(const std::vector<double>& f, std::size_t i, double dt) {
    return (f[i + 1] - f[i - 1]) / (2.0 * dt);
}

/// Fourth-order central difference.
inline double fd5(const std::vector<double>& f, std::size_t i, double dt) {
    return (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * dt);
}

inline double state_distance(const VectorState& a, const VectorState& b) {
    return std::sqrt(squared_norm(a.rdot - b.rdot) + squared_norm(a.L - b.L) +
                     squared_norm(a.axis - b.axis));
}

} // namespace gtop::testsupport
