// Chart conversion tests: frame conventions, round trips, singularity guard.

#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include <gtop/charts.hpp>

#include "support/oracles.hpp"

using namespace gtop;
using gtop::testsupport::default_params;
using gtop::testsupport::random_euler;
using gtop::testsupport::random_phi;

TEST(Charts, EquatorialRestConvention) {
    const PhysicalParams p = default_params();
    EulerState e;
    e.theta = std::numbers::pi / 2.0;
    const VectorState v = euler_to_vector(e, 0.0, p);
    // At phi = 0 the axis leans along inertial x.
    EXPECT_NEAR(v.axis.x, 1.0, 1e-15);
    EXPECT_NEAR(v.axis.y, 0.0, 1e-15);
    EXPECT_NEAR(v.axis.z, 0.0, 1e-15);
    EXPECT_EQ(norm(v.L), 0.0);
    EXPECT_EQ(v.rdot.x, 0.0);
    EXPECT_EQ(v.rdot.y, 0.0);
}

TEST(Charts, RoundTripIsIdentityOnTheInterior) {
    const PhysicalParams p = default_params();
    std::mt19937_64 rng(31);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const EulerState e = random_euler(rng);
        const double phi = random_phi(rng);
        const VectorState v = euler_to_vector(e, phi, p);
        const EulerWithAzimuth back = vector_to_euler(v, p);
        const VectorState v2 = euler_to_vector(back.state, back.phi, p);
        worst = std::max({worst, std::abs(v2.rdot.x - v.rdot.x), std::abs(v2.rdot.y - v.rdot.y),
                          norm(v2.L - v.L), norm(v2.axis - v.axis)});
        EXPECT_NEAR(back.state.theta, e.theta, 1e-12);
        EXPECT_NEAR(back.state.omega3, e.omega3, 1e-10 * (1.0 + std::abs(e.omega3)));
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(Charts, GlidingComponentsRotateWithAzimuth) {
    const PhysicalParams p = default_params();
    std::mt19937_64 rng(32);
    for (int i = 0; i < 300; ++i) {
        EulerState e = random_euler(rng);
        const double phi = random_phi(rng);
        const VectorState v = euler_to_vector(e, phi, p);
        const Vec2 vA = gliding_velocity(v, p);
        // Rotating the inertial components back by phi recovers (nux, nuy).
        const double cp = std::cos(phi), sp = std::sin(phi);
        EXPECT_NEAR(cp * vA.x + sp * vA.y, e.nux, 1e-12);
        EXPECT_NEAR(-sp * vA.x + cp * vA.y, e.nuy, 1e-12);
    }
}

TEST(Charts, SingularAtVerticalAxis) {
    const PhysicalParams p = default_params();
    VectorState v;
    v.axis = {0.0, 0.0, 1.0};
    EXPECT_THROW(vector_to_euler(v, p), ChartSingularity);
    v.axis = {1e-9, 0.0, -1.0};
    EXPECT_THROW(vector_to_euler(v, p), ChartSingularity);
}

TEST(Charts, AxisRateMatchesKinematics) {
    const PhysicalParams p = default_params();
    std::mt19937_64 rng(33);
    for (int i = 0; i < 300; ++i) {
        const EulerState e = random_euler(rng);
        const double phi = random_phi(rng);
        const VectorState v = euler_to_vector(e, phi, p);
        const FrameBasis b = frame_basis(e.theta, phi);
        const Vec3 expected = e.thetadot * b.e1 + e.phidot * std::sin(e.theta) * b.e2;
        EXPECT_NEAR(norm(axis_rate(v, p) - expected), 0.0, 1e-11 * (1.0 + norm(expected)));
    }
}
