#pragma once

#include <ostream>
#include <stdexcept>
#include <vector>

#include <gtop/state.hpp>

namespace gtop {

/// Which vertical spinning solution a trajectory settled on, if any.
enum class Limit { Upright, Inverted, Undetermined };

enum class TerminationKind {
    TimeEnd,               ///< reached t_end
    ContactLoss,           ///< gn crossed zero (model invalid beyond)
    Converged,             ///< convergence predicate held over a full window
    DegenerateDenominator, ///< reaction-force equation became singular
};

inline const char* to_string(Limit l) {
    switch (l) {
        case Limit::Upright: return "Upright";
        case Limit::Inverted: return "Inverted";
        default: return "Undetermined";
    }
}

inline const char* to_string(TerminationKind k) {
    switch (k) {
        case TerminationKind::TimeEnd: return "TimeEnd";
        case TerminationKind::ContactLoss: return "ContactLoss";
        case TerminationKind::Converged: return "Converged";
        default: return "DegenerateDenominator";
    }
}

inline std::ostream& operator<<(std::ostream& os, Limit l) { return os << to_string(l); }
inline std::ostream& operator<<(std::ostream& os, TerminationKind k) {
    return os << to_string(k);
}

struct Termination {
    TerminationKind kind = TerminationKind::TimeEnd;
    double t = 0.0;
    Limit limit = Limit::Undetermined; ///< set when kind == Converged
};

struct IntegratorConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double h_init = 0.0; ///< <= 0 selects the step size automatically
    double h_max = 0.1;
    double t_end = 10.0;
    double sample_dt = 1e-2;            ///< output cadence
    bool detect_convergence = true;     ///< stop once a limit solution is reached

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
        if (!(h_max > 0.0)) throw std::invalid_argument("IntegratorConfig: h_max must be > 0");
        if (!(t_end > 0.0)) throw std::invalid_argument("IntegratorConfig: t_end must be > 0");
        if (!(sample_dt > 0.0))
            throw std::invalid_argument("IntegratorConfig: sample_dt must be > 0");
    }
};

struct TrajectorySample {
    double t = 0.0;
    VectorState state;
    MonitoredScalars scalars;
};

/// Time-stamped output of one integration. Sample times are strictly
/// increasing; every sample before a ContactLoss event has gn >= 0, and the
/// recorded energies are non-increasing within integration tolerance.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    Termination termination;
};

} // namespace gtop
