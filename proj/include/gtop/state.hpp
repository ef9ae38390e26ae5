#pragma once

#include <gtop/vec.hpp>

namespace gtop {

/// Singularity-free state used for integration.
///
/// The vertical CM velocity is not stored: the contact constraint determines
/// it as sdot_z = l * d(axis)/dt . zhat, and the gliding velocity of the tip
/// is horizontal by construction.
struct VectorState {
    Vec2 rdot; ///< horizontal CM velocity [m/s]
    Vec3 L;    ///< angular momentum about the CM [kg m^2/s]
    Vec3 axis; ///< unit symmetry axis (renormalized by the integrator)
};

/// Euler-chart state (theta, thetadot, phidot, omega3, nu_x, nu_y).
///
/// theta is the inclination of the symmetry axis from vertical and must stay
/// strictly inside (0, pi) for any operation that divides by sin(theta).
/// nu_x, nu_y are the gliding-velocity components along xhat = e2 x zhat and
/// yhat = e2 of the frame co-rotating with the precession.
struct EulerState {
    double theta = 0.0;    ///< [rad]
    double thetadot = 0.0; ///< [rad/s]
    double phidot = 0.0;   ///< precession rate [rad/s]
    double omega3 = 0.0;   ///< axial angular velocity, psidot + phidot*cos(theta) [rad/s]
    double nux = 0.0;      ///< [m/s]
    double nuy = 0.0;      ///< [m/s]
};

/// Scalar diagnostics recorded along a trajectory.
struct MonitoredScalars {
    double energy = 0.0;  ///< total mechanical energy E [J]
    double gn = 0.0;      ///< vertical reaction force [N]
    double L3 = 0.0;      ///< L . axis [kg m^2/s], the one integral of motion
    double Lz = 0.0;      ///< L . zhat [kg m^2/s]
    double LAz = 0.0;     ///< tip-referred L_A . zhat [kg m^2/s]
    double vA_norm = 0.0; ///< gliding speed |v_A| [m/s]
    double Edot = 0.0;    ///< -mu * gn * |v_A|^2 [W], computed from the identity
};

} // namespace gtop
