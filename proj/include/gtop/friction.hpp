#pragma once

#include <functional>
#include <stdexcept>

#include <gtop/state.hpp>

namespace gtop {

/// Pluggable friction coefficient mu(state) >= 0.
///
/// mu may depend on any dynamical variable except the reaction force g_n:
/// the constraint solve treats mu as known, so a g_n-dependent law would make
/// the reaction-force equation implicit. The signature enforces that.
class FrictionModel {
  public:
    using VectorLaw = std::function<double(const VectorState&)>;
    using EulerLaw = std::function<double(const EulerState&)>;

    FrictionModel(VectorLaw on_vector, EulerLaw on_euler)
        : on_vector_(std::move(on_vector)), on_euler_(std::move(on_euler)) {}

    static FrictionModel constant(double mu) {
        if (!(mu >= 0.0)) throw std::invalid_argument("FrictionModel: mu must be >= 0");
        return FrictionModel([mu](const VectorState&) { return mu; },
                             [mu](const EulerState&) { return mu; });
    }

    double operator()(const VectorState& s) const { return checked(on_vector_(s)); }
    double operator()(const EulerState& s) const { return checked(on_euler_(s)); }

  private:
    static double checked(double mu) {
        if (!(mu >= 0.0)) throw std::domain_error("FrictionModel: evaluated mu < 0");
        return mu;
    }

    VectorLaw on_vector_;
    EulerLaw on_euler_;
};

} // namespace gtop
