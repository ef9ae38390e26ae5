#pragma once

#include <stdexcept>
#include <string>

namespace gtop {

/// Physical constants of an axisymmetric top with a point tip that slides on
/// the horizontal support plane. Strict SI throughout.
///
/// The tip A sits at a = -l*axis from the centre of mass, so l > 0 places the
/// tip below the CM when the top is upright.
class PhysicalParams {
  public:
    double m;      ///< mass [kg]
    double g;      ///< gravitational acceleration [m/s^2]
    double l;      ///< distance CM -> tip [m]
    double I1;     ///< transverse moment of inertia about the CM [kg m^2]
    double I3;     ///< axial moment of inertia [kg m^2]
    double I1star; ///< transverse moment about the tip, I1 + m l^2 [kg m^2]

    // Numerical guards, overridable from config.
    double den_guard = 1e-12; ///< relative floor for the reaction-force denominator
    double sin_guard = 1e-8;  ///< |sin theta| floor for Euler-chart validity

    PhysicalParams(double mass, double gravity, double tip_distance, double transverse_inertia,
                   double axial_inertia)
        : m(mass), g(gravity), l(tip_distance), I1(transverse_inertia), I3(axial_inertia),
          I1star(transverse_inertia + mass * tip_distance * tip_distance) {
        validate();
    }

    /// Diagnostic constructor that decouples I1star from I1 + m l^2. Only the
    /// `check` negative controls should need this; physical runs never do.
    static PhysicalParams with_pivot_inertia_override(double mass, double gravity,
                                                      double tip_distance,
                                                      double transverse_inertia,
                                                      double axial_inertia, double pivot_inertia) {
        PhysicalParams p(mass, gravity, tip_distance, transverse_inertia, axial_inertia);
        if (pivot_inertia <= 0.0)
            throw std::invalid_argument("PhysicalParams: pivot inertia override must be > 0");
        p.I1star = pivot_inertia;
        return p;
    }

  private:
    void validate() const {
        if (!(m > 0.0)) throw std::invalid_argument("PhysicalParams: m must be > 0");
        if (!(g > 0.0)) throw std::invalid_argument("PhysicalParams: g must be > 0");
        if (!(l > 0.0)) throw std::invalid_argument("PhysicalParams: l must be > 0");
        if (!(I1 > 0.0)) throw std::invalid_argument("PhysicalParams: I1 must be > 0");
        if (!(I3 > 0.0)) throw std::invalid_argument("PhysicalParams: I3 must be > 0");
        // Perpendicular-axis feasibility for a rigid body.
        if (I3 > 2.0 * I1)
            throw std::invalid_argument("PhysicalParams: I3 <= 2*I1 required (rigid body)");
    }
};

} // namespace gtop
