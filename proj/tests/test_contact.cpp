#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "deltacharger/contact.hpp"
#include "deltacharger/error.hpp"
#include "deltacharger/polygon.hpp"
#include "deltacharger/rng.hpp"

using namespace deltacharger;
using namespace deltacharger::contact;

namespace {

MisalignmentState at(double phi, double dx = 0, double dy = 0, double dz = 15) { return {phi, dx, dy, dz}; }

double centroid_row(const TactileFrame& f, int sensor) { return centroid(f, sensor).value().x(); }

}  // namespace

TEST_CASE("polygon clipping areas") {
    using geometry::Point;
    const auto a = geometry::rectangle(Point(0, 0), 4, 2);
    CHECK(geometry::area(a) == doctest::Approx(8));
    const auto b = geometry::rectangle(Point(1, 1), 4, 2);
    CHECK(geometry::overlap_area(a, b) == doctest::Approx(3 * 1));
    CHECK(geometry::overlap_area(a, geometry::rectangle(Point(10, 0), 1, 1)) == doctest::Approx(0));
    // 45 deg square of half-diagonal 1 inside a 2x2 box keeps its full area
    const auto d = geometry::rigid_transform(geometry::rectangle(Point(0, 0), std::sqrt(2.0), std::sqrt(2.0)), 45,
                                             Point(0, 0));
    CHECK(geometry::overlap_area(d, geometry::rectangle(Point(0, 0), 2, 2)) == doctest::Approx(2));
}

TEST_CASE("aligned frame is mirror-symmetric across the pair") {
    const ElectrodePlan plan;
    const auto f = render_frame_noiseless(plan, at(0));
    CHECK_FALSE(f.all_zero());
    CHECK(centroid_row(f, 0) == doctest::Approx(centroid_row(f, 1)).epsilon(1e-12));
    const Grid mirrored = f.sensors[0].rowwise().reverse();
    CHECK((mirrored - f.sensors[1]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("tilt skews the pair in opposite directions") {
    const ElectrodePlan plan;
    const auto pos = render_frame_noiseless(plan, at(4));
    const auto neg = render_frame_noiseless(plan, at(-4));
    const double dpos = centroid_row(pos, 0) - centroid_row(pos, 1);
    const double dneg = centroid_row(neg, 0) - centroid_row(neg, 1);
    CHECK(dpos * dneg < 0);
}

TEST_CASE("no contact gives an all-zero frame") {
    const ElectrodePlan plan;
    CHECK(render_frame(plan, at(2, 3, -1, -1), 5).all_zero());
    CHECK(render_frame(plan, at(0, 0, 15), 5).all_zero());
    CHECK(render_frame(plan, at(0, 11, 0), 5).all_zero());
    CHECK(render_frame_noiseless(plan, at(3, 0, -10.5)).all_zero());
}

TEST_CASE("short-circuit oracle cases") {
    const ElectrodePlan plan;
    CHECK(short_circuit_oracle(plan, at(0)) == SafetyVerdict::Safe);
    CHECK(short_circuit_oracle(plan, at(14)) == SafetyVerdict::Short);
    CHECK(short_circuit_oracle(plan, at(0, 0, 15)) == SafetyVerdict::NoContact);
    CHECK(short_circuit_oracle(plan, at(0, 0, 0, -2)) == SafetyVerdict::NoContact);
}

TEST_CASE("critical angle lies near 12 degrees and the oracle is monotonic in phi") {
    const ElectrodePlan plan;
    // independent bisection on the public oracle
    double lo = 0, hi = 15;
    REQUIRE(short_circuit_oracle(plan, at(lo)) == SafetyVerdict::Safe);
    REQUIRE(short_circuit_oracle(plan, at(hi)) == SafetyVerdict::Short);
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (short_circuit_oracle(plan, at(mid)) == SafetyVerdict::Short ? hi : lo) = mid;
    }
    CHECK(lo >= 11.5);
    CHECK(hi <= 12.5);
    CHECK(critical_angle(plan) == doctest::Approx(hi).epsilon(1e-5));
    for (double phi = 0; phi <= 15; phi += 0.01) {
        const auto v = short_circuit_oracle(plan, at(phi));
        if (phi < lo) CHECK(v == SafetyVerdict::Safe);
        if (phi > hi) CHECK(v == SafetyVerdict::Short);
    }
}

TEST_CASE("bar geometry") {
    const ElectrodePlan plan;
    CHECK(plan.bar_gap() == doctest::Approx(2 * 12.54 - 4));
    CHECK(plan.sensor_side * plan.sensor_side == doctest::Approx(580));
    CHECK_NOTHROW(plan.validate());
}

TEST_CASE("servo current follows the linear model") {
    const CurrentModel m;
    auto oracle = [](double d) { return 0.10 + 0.02 * std::max(d, 0.0); };
    CHECK(servo_current(m, -5) == doctest::Approx(0.10));
    CHECK(servo_current(m, 15) == doctest::Approx(0.40));
    CHECK(servo_current(m, 25) == doctest::Approx(0.60));
    CHECK(servo_current(m, 25) > m.overheat);
    double prev = servo_current(m, -20);
    for (double d = -20; d <= 40; d += 0.25) {
        const double c = servo_current(m, d);
        CHECK(c == doctest::Approx(oracle(d)));
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("stepping in 5 mm increments always stops inside the hold band") {
    const CurrentModel m;
    for (double start = -30; start <= 20; start += 0.37) {
        double d = start;
        while (servo_current(m, d) < m.hold_low) d += 5;
        const double c = servo_current(m, d);
        CHECK(c >= 0.4);
        CHECK(c < 0.5);
    }
}

TEST_CASE("rendering is deterministic in the seed") {
    const ElectrodePlan plan;
    const auto a = render_frame(plan, at(2.5, 1, -2), 99);
    const auto b = render_frame(plan, at(2.5, 1, -2), 99);
    const auto c = render_frame(plan, at(2.5, 1, -2), 100);
    CHECK(a.flatten() == b.flatten());
    CHECK(a.flatten() != c.flatten());
}

TEST_CASE("rendered cells are clamped and floored") {
    const ElectrodePlan plan;
    Rng rng(derive_seed(3, 0));
    std::uniform_real_distribution<double> phi(0, 15), off(-12, 12), dz(-2, 30);
    for (int i = 0; i < 300; ++i) {
        const auto f = render_frame(plan, at(phi(rng), off(rng), off(rng), dz(rng)), rng());
        const auto v = f.flatten();
        for (int k = 0; k < kFeatures; ++k) {
            CHECK(v[k] >= 0);
            CHECK(v[k] <= 9);
            CHECK_FALSE((v[k] > 0 && v[k] < 1));
        }
    }
}

TEST_CASE("angle class centres have distinct centroid signatures") {
    const ElectrodePlan plan;
    std::vector<double> skew;
    for (int k = 0; k < 6; ++k) {
        const auto f = render_frame_noiseless(plan, at(k + 0.5));
        skew.push_back(centroid_row(f, 0) - centroid_row(f, 1));
    }
    for (std::size_t i = 0; i < skew.size(); ++i)
        for (std::size_t j = i + 1; j < skew.size(); ++j) CHECK(std::abs(skew[i] - skew[j]) > 0);
}

TEST_CASE("frame flattening round trip") {
    const ElectrodePlan plan;
    const auto f = render_frame(plan, at(1, 2, 3), 8);
    const auto g = TactileFrame::from_features(f.flatten());
    CHECK(g.flatten() == f.flatten());
    CHECK(f.flatten()[100 + 3 * 10 + 4] == f.sensors[1](3, 4));
}

TEST_CASE("state validation") {
    CHECK_THROWS_AS(at(16).validate(), Error);
    CHECK_THROWS_AS(at(0, 26).validate(), Error);
    CHECK_NOTHROW(at(-3, 25, -25).validate());
}
