#pragma once

// Equations of motion for an axisymmetric top whose tip glides with friction
// on the horizontal plane z = 0.
//
// Conventions (used consistently across the project):
//   * (e1, e2, e3) is the frame following the body minus its axial spin; e3 is
//     the symmetry axis, zhat = -sin(theta) e1 + cos(theta) e3.
//   * a = -l e3 points from the CM to the tip A.
//   * The force at A is F = -mu gn v_A + gn zhat, with v_A the tip velocity.
//   * All stored components are inertial-frame unless stated otherwise.
//
// The motion of the CM reduces to m rddot = -mu gn v_A; the vertical CM
// coordinate follows the constraint s_z = l (axis . zhat).

#include <cmath>
#include <string>

#include <gtop/errors.hpp>
#include <gtop/friction.hpp>
#include <gtop/params.hpp>
#include <gtop/state.hpp>
#include <gtop/vec.hpp>

namespace gtop {

/// Rate of change of a VectorState.
struct VectorRate {
    Vec2 rddot;    ///< [m/s^2]
    Vec3 Ldot;     ///< [kg m^2/s^2]
    Vec3 axis_dot; ///< [1/s]
};

/// Rate of change of an EulerState.
struct EulerRate {
    double thetadot = 0.0;
    double thetaddot = 0.0;
    double phiddot = 0.0;
    double omega3dot = 0.0; ///< identically zero: L . e3 is conserved
    double nuxdot = 0.0;
    double nuydot = 0.0;
};

struct VectorDerivatives {
    VectorRate rate;
    double gn = 0.0;
};

struct EulerDerivatives {
    EulerRate rate;
    double gn = 0.0;
};

struct MomentumScalars {
    double L3 = 0.0;  ///< L . e3
    double Lz = 0.0;  ///< L . zhat
    double LAz = 0.0; ///< tip-referred (L + m a x (omega x a)) . zhat
};

/// Inverts L = I omega for the axisymmetric inertia tensor.
/// omega = (L - (L.e3) e3)/I1 + ((L.e3)/I3) e3
inline Vec3 angular_velocity(const Vec3& L, const Vec3& axis, const PhysicalParams& p) {
    const double L3 = dot(L, axis);
    return (L - L3 * axis) / p.I1 + (L3 / p.I3) * axis;
}

/// d(axis)/dt = omega x e3 = (L x e3)/I1; the axial spin drops out.
inline Vec3 axis_rate(const VectorState& s, const PhysicalParams& p) {
    return cross(s.L, s.axis) / p.I1;
}

/// Horizontal gliding velocity of the tip, v_A = sdot + omega x a.
/// With sdot_z derived from the constraint the vertical component cancels
/// identically, so only the horizontal part is produced.
inline Vec2 gliding_velocity(const VectorState& s, const PhysicalParams& p) {
    const Vec3 ad = axis_rate(s, p);
    return s.rdot - p.l * horizontal(ad);
}

/// Residual vertical tip velocity reconstructed the long way round
/// (sdot_z + (omega x a) . zhat). Exactly zero in exact arithmetic; reported
/// as a constraint-drift diagnostic.
inline double vertical_tip_speed(const VectorState& s, const PhysicalParams& p) {
    const double sdot_z = p.l * cross(s.L, s.axis).z / p.I1;
    const Vec3 omega = angular_velocity(s.L, s.axis, p);
    return sdot_z - p.l * cross(omega, s.axis).z;
}

/// Vertical reaction force from the second derivative of the contact
/// constraint (vector chart). May legitimately be negative; the caller
/// decides whether that ends the run.
inline double normal_force_vector(const VectorState& s, const PhysicalParams& p, double mu) {
    const double az = dot(s.axis, kZHat);
    const double L3 = dot(s.L, s.axis);
    const double Lz = dot(s.L, kZHat);
    const double L2 = squared_norm(s.L);
    const Vec2 vA = gliding_velocity(s, p);
    const double vA_dot_axis = vA.x * s.axis.x + vA.y * s.axis.y;

    const double ml2I1 = p.m * p.l * p.l * p.I1;
    const double den =
        p.I1 * p.I1 + ml2I1 * (1.0 - az * az) + ml2I1 * mu * az * vA_dot_axis;
    if (std::abs(den) < p.den_guard * p.I1 * p.I1)
        throw DegenerateDenominator("normal_force_vector: constraint denominator ~ 0 (den=" +
                                    std::to_string(den) + ")");

    const double num = p.m * p.g * p.I1 * p.I1 + p.m * p.l * (L3 * Lz - az * L2);
    return num / den;
}

/// Vertical reaction force in the Euler chart; agrees with the vector form
/// after chart conversion.
inline double normal_force_euler(const EulerState& s, const PhysicalParams& p, double mu) {
    const double st = std::sin(s.theta);
    const double ct = std::cos(s.theta);
    const double ml2 = p.m * p.l * p.l;

    const double den = p.I1 + ml2 * st * st + ml2 * mu * s.nux * st * ct;
    if (std::abs(den) < p.den_guard * p.I1)
        throw DegenerateDenominator("normal_force_euler: constraint denominator ~ 0 (den=" +
                                    std::to_string(den) + ")");

    const double rates = s.thetadot * s.thetadot + s.phidot * s.phidot * st * st;
    const double num =
        p.m * p.g * p.I1 - p.m * p.l * (p.I1 * ct * rates - p.I3 * s.omega3 * s.phidot * st * st);
    return num / den;
}

/// Full right-hand side in the vector chart. Returns the evaluated reaction
/// force alongside the rate for event detection.
inline VectorDerivatives derivatives_vector(const VectorState& s, const PhysicalParams& p,
                                            const FrictionModel& friction) {
    const double mu = friction(s);
    const double gn = normal_force_vector(s, p, mu);
    const Vec2 vA = gliding_velocity(s, p);

    const Vec3 force{-mu * gn * vA.x, -mu * gn * vA.y, gn};
    VectorRate rate;
    rate.rddot = (-mu * gn / p.m) * vA;
    rate.Ldot = -p.l * cross(s.axis, force); // a x F with a = -l e3
    rate.axis_dot = axis_rate(s, p);
    return {rate, gn};
}

/// Full right-hand side in the Euler chart.
inline EulerDerivatives derivatives_euler(const EulerState& s, const PhysicalParams& p,
                                          const FrictionModel& friction) {
    const double st = std::sin(s.theta);
    const double ct = std::cos(s.theta);
    if (std::abs(st) < p.sin_guard)
        throw ChartSingularity("derivatives_euler: |sin theta| below guard at theta=" +
                               std::to_string(s.theta));

    const double mu = friction(s);
    const double gn = normal_force_euler(s, p, mu);

    const double I1 = p.I1, I3 = p.I3, l = p.l, m = p.m;
    EulerRate r;
    r.thetadot = s.thetadot;
    r.thetaddot = (I1 * s.phidot * s.phidot * st * ct - I3 * s.omega3 * s.phidot * st +
                   l * mu * gn * s.nux * ct + l * gn * st) /
                  I1;
    r.phiddot =
        (I3 * s.omega3 * s.thetadot - 2.0 * I1 * s.thetadot * s.phidot * ct + l * mu * gn * s.nuy) /
        (I1 * st);
    r.omega3dot = 0.0;
    r.nuxdot = (l * st / I1) * (I3 * s.omega3 * s.phidot * ct +
                                I1 * (s.thetadot * s.thetadot + s.phidot * s.phidot * st * st) -
                                l * gn * ct) -
               (mu * gn * s.nux / (m * I1)) * (I1 + m * l * l * ct * ct) + s.nuy * s.phidot;
    r.nuydot = -(l * I3 * s.omega3 * s.thetadot) / I1 - (p.I1star / (m * I1)) * mu * gn * s.nuy -
               s.nux * s.phidot;
    return {r, gn};
}

/// Total mechanical energy, vector chart:
/// E = 1/2 m sdot^2 + 1/2 omega . L + m g s_z.
inline double total_energy(const VectorState& s, const PhysicalParams& p) {
    const double sdot_z = p.l * cross(s.L, s.axis).z / p.I1;
    const double trans = 0.5 * p.m * (squared_norm(s.rdot) + sdot_z * sdot_z);
    const double L3 = dot(s.L, s.axis);
    const double rot = 0.5 * ((squared_norm(s.L) - L3 * L3) / p.I1 + L3 * L3 / p.I3);
    const double pot = p.m * p.g * p.l * dot(s.axis, kZHat);
    return trans + rot + pot;
}

/// Total mechanical energy, Euler chart. Identical quantity; the pivot
/// inertia I1star makes the cross terms collapse.
inline double total_energy(const EulerState& s, const PhysicalParams& p) {
    const double st = std::sin(s.theta);
    const double ct = std::cos(s.theta);
    const double glide = 0.5 * p.m * (s.nux * s.nux + s.nuy * s.nuy);
    const double coupling = p.m * p.l * (s.nux * s.thetadot * ct + s.nuy * s.phidot * st);
    const double rot = 0.5 * (p.I1star * (s.thetadot * s.thetadot + s.phidot * s.phidot * st * st) +
                              p.I3 * s.omega3 * s.omega3);
    return glide + coupling + rot + p.m * p.g * p.l * ct;
}

/// Edot = F . v_A = -mu gn |v_A|^2; non-positive whenever gn >= 0.
inline double energy_dissipation_rate(const VectorState& s, const PhysicalParams& p,
                                      const FrictionModel& friction) {
    const double mu = friction(s);
    const double gn = normal_force_vector(s, p, mu);
    return -mu * gn * squared_norm(gliding_velocity(s, p));
}

inline double energy_dissipation_rate(const EulerState& s, const PhysicalParams& p,
                                      const FrictionModel& friction) {
    const double mu = friction(s);
    const double gn = normal_force_euler(s, p, mu);
    return -mu * gn * (s.nux * s.nux + s.nuy * s.nuy);
}

/// (L.e3, L.zhat, L_A.zhat). The tip-referred momentum uses the Steiner shift
/// restricted to the a-relative term, L_A = L + (m l^2/I1)(L - (L.e3) e3).
inline MomentumScalars angular_momentum_scalars(const VectorState& s, const PhysicalParams& p) {
    MomentumScalars out;
    out.L3 = dot(s.L, s.axis);
    out.Lz = dot(s.L, kZHat);
    out.LAz = out.Lz + (p.m * p.l * p.l / p.I1) * (out.Lz - out.L3 * dot(s.axis, kZHat));
    return out;
}

inline MomentumScalars angular_momentum_scalars(const EulerState& s, const PhysicalParams& p) {
    const double st = std::sin(s.theta);
    const double ct = std::cos(s.theta);
    MomentumScalars out;
    out.L3 = p.I3 * s.omega3;
    out.Lz = p.I1 * s.phidot * st * st + out.L3 * ct;
    out.LAz = p.I1star * s.phidot * st * st + out.L3 * ct;
    return out;
}

/// d(L.zhat)/dt = l mu gn nu_y sin(theta).
inline double vertical_momentum_rate(const EulerState& s, const PhysicalParams& p,
                                     const FrictionModel& friction) {
    const double mu = friction(s);
    const double gn = normal_force_euler(s, p, mu);
    return p.l * mu * gn * s.nuy * std::sin(s.theta);
}

/// All monitored diagnostics at one state.
inline MonitoredScalars monitored_scalars(const VectorState& s, const PhysicalParams& p,
                                          const FrictionModel& friction) {
    const double mu = friction(s);
    MonitoredScalars out;
    out.energy = total_energy(s, p);
    out.gn = normal_force_vector(s, p, mu);
    const MomentumScalars ms = angular_momentum_scalars(s, p);
    out.L3 = ms.L3;
    out.Lz = ms.Lz;
    out.LAz = ms.LAz;
    out.vA_norm = norm(gliding_velocity(s, p));
    out.Edot = -mu * out.gn * out.vA_norm * out.vA_norm;
    return out;
}

} // namespace gtop
