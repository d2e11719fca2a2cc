#include <doctest.h>

#include <cmath>
#include <random>

#include "deltacharger/kinematics.hpp"
#include "deltacharger/rng.hpp"

using namespace deltacharger;
using namespace deltacharger::kinematics;

using Geom = DeltaGeometry<double>;
using P = Pose<double>;

namespace {

ErrorKind error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("centered pose gives three equal joint angles") {
    const Geom g;
    for (double z : {0.0, 40.0, 110.0}) {
        const auto j = inverse_kinematics(g, P(0, 0, z));
        CHECK(j[0] == doctest::Approx(j[1]).epsilon(1e-12));
        CHECK(j[1] == doctest::Approx(j[2]).epsilon(1e-12));
    }
}

TEST_CASE("far target is unreachable") {
    CHECK(error_of([] { inverse_kinematics(Geom{}, P(0, 0, 500)); }) == ErrorKind::Unreachable);
}

TEST_CASE("round trip at a fixed pose") {
    const Geom g;
    const P p(10, -5, 80);
    const P back = forward_kinematics(g, inverse_kinematics(g, p));
    CHECK((back - p).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("round trip over random workspace poses") {
    const Geom g;
    Rng rng(derive_seed(11, 0));
    std::uniform_real_distribution<double> xy(-60, 60), z(0, 110);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const P p(xy(rng), xy(rng), z(rng));
        worst = std::max(worst, (forward_kinematics(g, inverse_kinematics(g, p)) - p).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("round trip on the 5 mm workspace grid") {
    const Geom g;
    double worst = 0;
    for (double x = -60; x <= 60; x += 5)
        for (double y = -60; y <= 60; y += 5)
            for (double z = 0; z <= 110; z += 5) {
                const P p(x, y, z);
                worst = std::max(worst, (forward_kinematics(g, inverse_kinematics(g, p)) - p).cwiseAbs().maxCoeff());
            }
    CHECK(worst <= 1e-6);
}

TEST_CASE("equal joint angles map to the central axis") {
    const Geom g;
    for (double t : {-30.0, 0.0, 20.0, 45.0}) {
        JointAngles<double> j;
        j.degrees.setConstant(t);
        const P p = forward_kinematics(g, j);
        CHECK(std::abs(p.x()) < 1e-9);
        CHECK(std::abs(p.y()) < 1e-9);
    }
}

TEST_CASE("rotating the target by 120 degrees permutes the joints cyclically") {
    const Geom g;
    const double a = deg2rad(120.0);
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    for (const P& p : {P(10, -5, 80), P(-40, 25, 10), P(55, 55, 100)}) {
        const auto j = inverse_kinematics(g, p);
        const auto jr = inverse_kinematics(g, P(rot * p));
        // limb i sees the rotated target the way limb i-1 saw the original
        for (int i = 0; i < 3; ++i) CHECK(std::abs(jr[i] - j[(i + 2) % 3]) < 1e-9);
    }
}

TEST_CASE("common joint angle is monotonic in z") {
    const Geom g;
    double prev = inverse_kinematics(g, P(0, 0, 0))[0];
    int sign = 0;
    for (double z = 1; z <= 110; z += 1) {
        const double cur = inverse_kinematics(g, P(0, 0, z))[0];
        const int s = cur > prev ? 1 : (cur < prev ? -1 : 0);
        REQUIRE(s != 0);
        if (sign == 0) sign = s;
        CHECK(s == sign);
        prev = cur;
    }
}

TEST_CASE("inconsistent joints have no intersection") {
    // The default 280 mm forearm exceeds every possible elbow circumradius, so
    // the spheres always meet. With a 150 mm forearm the circumradius is 140 mm
    // at zero joints and 172 mm after flipping one limb by 180 deg.
    Geom g;
    g.forearm = 150;
    JointAngles<double> j;
    j.degrees << 0, 0, 0;
    CHECK_NOTHROW(forward_kinematics(g, j));
    j[0] += 180;
    CHECK(error_of([&] { forward_kinematics(g, j); }) == ErrorKind::NoIntersection);
}

TEST_CASE("default geometry covers the workspace") {
    const auto report = validate_workspace(Geom{});
    CHECK(report.passed);
    CHECK(report.fraction == 1.0);
    CHECK(report.samples == 25u * 25u * 23u);
    CHECK(report.max_abs_joint_deg <= 90.0);
}

TEST_CASE("short forearm fails the workspace sweep") {
    Geom g;
    g.forearm = 10;
    // forearm 10 with the default 80 mm upper arm breaks the geometry invariant
    CHECK(error_of([&] { validate_workspace(g); }) == ErrorKind::InvalidArgument);
    g.upper_arm = 5;
    const auto report = validate_workspace(g);
    CHECK_FALSE(report.passed);
    CHECK(report.fraction < 1.0);
}

TEST_CASE("invalid geometry is rejected") {
    Geom g;
    g.upper_arm = 0;
    CHECK(error_of([&] { validate_workspace(g); }) == ErrorKind::InvalidArgument);
    Geom h;
    h.limb_azimuths_deg = {0, 100, 240};
    CHECK(error_of([&] { inverse_kinematics(h, P(0, 0, 50)); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("servo limit violations raise JointLimit") {
    Geom g;
    g.joint_limit_deg = 5;
    CHECK(error_of([&] { inverse_kinematics(g, P(0, 0, 110)); }) == ErrorKind::JointLimit);
}

TEST_CASE("float instantiation works") {
    const DeltaGeometry<float> g;
    const Pose<float> p(5.f, 5.f, 50.f);
    const auto back = forward_kinematics(g, inverse_kinematics(g, p));
    CHECK((back - p).cwiseAbs().maxCoeff() < 1e-2f);
}
