#pragma once

// Effective-energy stability classification of the two vertical spins.
//
// On the asymptotic set the energy reduces to a function of theta alone,
//   E2(cos t) = L3^2/(2 I3) + (LAz - L3 cos t)^2 / (2 I1* (1 - cos^2 t))
//               + m g l cos t,
// and the character of its extrema at cos t = +-1 decides stability. The raw
// form is 0/0 at the boundary, so the boundary derivative uses the reduced
// closed forms.

#include <cmath>
#include <stdexcept>

#include <gtop/params.hpp>

namespace gtop {

enum class Branch { Upright, Inverted };

struct StabilityReport {
    double LA3 = 0.0;       ///< axial angular momentum about the tip [kg m^2/s]
    double threshold = 0.0; ///< 2 sqrt(m g l I1*) [kg m^2/s]
    bool upright_stable = false;
    bool inverted_stable = true; ///< reported for symmetry; always true
    double e2_curvature_up = 0.0;   ///< E2'(cos t = 1); upright stable iff < 0
    double e2_curvature_down = 0.0; ///< E2'(cos t = -1); always > 0
};

/// E2 on the open interval; poles at |cos t| = 1 unless LAz = +-L3.
inline double effective_energy(double cos_theta, double LAz, double L3,
                               const PhysicalParams& p) {
    if (!(std::abs(cos_theta) < 1.0))
        throw std::domain_error("effective_energy: cos theta must lie strictly inside (-1, 1)");
    const double mismatch = LAz - L3 * cos_theta;
    return L3 * L3 / (2.0 * p.I3) +
           mismatch * mismatch / (2.0 * p.I1star * (1.0 - cos_theta * cos_theta)) +
           p.m * p.g * p.l * cos_theta;
}

/// d E2 / d(cos t) at the boundary, using the closed forms
///   upright:  -LA3^2 / (4 I1*) + m g l
///   inverted: +LA3^2 / (4 I1*) + m g l
/// Sign convention: E2''(theta = 0) > 0 iff the upright value is negative.
inline double e2_boundary_derivative(Branch which, double LA3, const PhysicalParams& p) {
    const double spin_term = LA3 * LA3 / (4.0 * p.I1star);
    const double grav = p.m * p.g * p.l;
    return which == Branch::Upright ? -spin_term + grav : spin_term + grav;
}

/// Threshold classification: upright stable iff LA3^2 > 4 m g l I1*
/// (strict inequality); inverted stable unconditionally.
inline StabilityReport classify_stability(double LA3, const PhysicalParams& p) {
    StabilityReport rep;
    rep.LA3 = LA3;
    rep.threshold = 2.0 * std::sqrt(p.m * p.g * p.l * p.I1star);
    rep.e2_curvature_up = e2_boundary_derivative(Branch::Upright, LA3, p);
    rep.e2_curvature_down = e2_boundary_derivative(Branch::Inverted, LA3, p);
    rep.upright_stable = rep.e2_curvature_up < 0.0;
    rep.inverted_stable = true;
    return rep;
}

} // namespace gtop
