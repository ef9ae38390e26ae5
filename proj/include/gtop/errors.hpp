#pragma once

#include <stdexcept>
#include <string>

namespace gtop {

/// The implicit constraint equation for the reaction force is singular at
/// this state; the trajectory cannot be continued.
struct DegenerateDenominator : std::runtime_error {
    explicit DegenerateDenominator(const std::string& what) : std::runtime_error(what) {}
};

/// The Euler chart is invalid here (|sin theta| below guard).
struct ChartSingularity : std::runtime_error {
    explicit ChartSingularity(const std::string& what) : std::runtime_error(what) {}
};

/// A scalar root search found no sign change in its bracket.
struct RootFindFailure : std::runtime_error {
    explicit RootFindFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gtop
