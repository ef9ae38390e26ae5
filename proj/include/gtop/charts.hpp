#pragma once

// Conversions between the Euler chart (theta, thetadot, phidot, omega3,
// nu_x, nu_y; azimuth phi) and the singularity-free vector chart
// (rdot, L, axis). The Euler chart is declared singular at theta in {0, pi}.

#include <cmath>
#include <string>

#include <gtop/dynamics.hpp>
#include <gtop/errors.hpp>
#include <gtop/params.hpp>
#include <gtop/state.hpp>
#include <gtop/vec.hpp>

namespace gtop {

/// Orthonormal frames attached to (theta, phi):
/// (e1, e2, e3) following the body minus spin, (xhat, yhat, zhat) co-rotating
/// with the precession, xhat = e2 x zhat.
struct FrameBasis {
    Vec3 e1, e2, e3;
    Vec3 xhat, yhat;
};

inline FrameBasis frame_basis(double theta, double phi) {
    const double st = std::sin(theta), ct = std::cos(theta);
    const double sp = std::sin(phi), cp = std::cos(phi);
    FrameBasis b;
    b.xhat = {cp, sp, 0.0};
    b.yhat = {-sp, cp, 0.0};
    b.e1 = {ct * cp, ct * sp, -st};
    b.e2 = b.yhat;
    b.e3 = {st * cp, st * sp, ct};
    return b;
}

struct EulerWithAzimuth {
    EulerState state;
    double phi = 0.0;
};

inline VectorState euler_to_vector(const EulerState& s, double phi, const PhysicalParams& p) {
    const FrameBasis b = frame_basis(s.theta, phi);
    const double st = std::sin(s.theta);

    VectorState v;
    v.axis = b.e3;
    v.L = (-p.I1 * s.phidot * st) * b.e1 + (p.I1 * s.thetadot) * b.e2 + (p.I3 * s.omega3) * b.e3;
    const Vec3 axis_dot = s.thetadot * b.e1 + s.phidot * st * b.e2;
    const Vec3 vA = s.nux * b.xhat + s.nuy * b.yhat; // horizontal by construction
    v.rdot = horizontal(vA) + p.l * horizontal(axis_dot);
    return v;
}

inline EulerWithAzimuth vector_to_euler(const VectorState& s, const PhysicalParams& p) {
    const double st = std::hypot(s.axis.x, s.axis.y);
    if (st < p.sin_guard * norm(s.axis))
        throw ChartSingularity("vector_to_euler: axis within guard of vertical (sin theta = " +
                               std::to_string(st) + ")");

    EulerWithAzimuth out;
    out.state.theta = std::atan2(st, s.axis.z);
    out.phi = std::atan2(s.axis.y, s.axis.x);

    const FrameBasis b = frame_basis(out.state.theta, out.phi);
    out.state.thetadot = dot(s.L, b.e2) / p.I1;
    out.state.phidot = -dot(s.L, b.e1) / (p.I1 * std::sin(out.state.theta));
    out.state.omega3 = dot(s.L, b.e3) / p.I3;

    const Vec2 vA = gliding_velocity(s, p);
    out.state.nux = vA.x * b.xhat.x + vA.y * b.xhat.y;
    out.state.nuy = vA.x * b.yhat.x + vA.y * b.yhat.y;
    return out;
}

/// Pushes an Euler-chart rate forward to the vector chart: the time
/// derivative of (rdot, L, axis) along the Euler-chart flow. Used to check
/// that both formulations describe the same vector field.
inline VectorRate euler_rate_pushforward(const EulerState& s, double phi, const EulerRate& r,
                                         const PhysicalParams& p) {
    const FrameBasis b = frame_basis(s.theta, phi);
    const double st = std::sin(s.theta), ct = std::cos(s.theta);
    const double td = s.thetadot, pd = s.phidot;

    // Kinematics of the frame: ei_dot = omega_ref x ei.
    const Vec3 e1_dot = pd * ct * b.e2 - td * b.e3;
    const Vec3 e2_dot = -pd * ct * b.e1 - pd * st * b.e3;
    const Vec3 e3_dot = td * b.e1 + pd * st * b.e2;

    VectorRate out;
    out.axis_dot = e3_dot;

    out.Ldot = (-p.I1 * (r.phiddot * st + pd * td * ct)) * b.e1 + (-p.I1 * pd * st) * e1_dot +
               (p.I1 * r.thetaddot) * b.e2 + (p.I1 * td) * e2_dot + (p.I3 * r.omega3dot) * b.e3 +
               (p.I3 * s.omega3) * e3_dot;

    const Vec3 axis_ddot = r.thetaddot * b.e1 + td * e1_dot +
                           (r.phiddot * st + pd * td * ct) * b.e2 + pd * st * e2_dot;
    const Vec3 vA_dot = r.nuxdot * b.xhat + r.nuydot * b.yhat +
                        pd * (s.nux * b.yhat - s.nuy * b.xhat);
    out.rddot = horizontal(vA_dot) + p.l * horizontal(axis_ddot);
    return out;
}

} // namespace gtop
