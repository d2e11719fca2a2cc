#pragma once

// Inverted Delta kinematics. The actuator frame has its origin at the home
// position of the effector with +Z pointing from the setup ring toward the
// target robot; internally poses are shifted by z_home into the servo frame,
// where the three shoulder joints lie in the z = 0 plane.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deltacharger/error.hpp"

namespace deltacharger::kinematics {

template <typename Scalar>
using Pose = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
constexpr Scalar deg2rad(Scalar deg) {
    return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad2deg(Scalar rad) {
    return rad * Scalar(180) / std::numbers::pi_v<Scalar>;
}

/// Servo angles in degrees, measured from the shoulder plane; positive lifts
/// the elbow toward +Z.
template <typename Scalar>
struct JointAngles {
    Eigen::Matrix<Scalar, 3, 1> degrees = Eigen::Matrix<Scalar, 3, 1>::Zero();

    Scalar operator[](int i) const { return degrees[i]; }
    Scalar& operator[](int i) { return degrees[i]; }
};

/// Link lengths in mm. The defaults pass the 120 x 120 x 110 mm workspace
/// sweep with every servo inside +/-90 deg (worst case about 84 deg).
template <typename Scalar>
struct DeltaGeometry {
    Scalar base_radius = 100;
    Scalar effector_radius = 40;
    Scalar upper_arm = 80;
    Scalar forearm = 280;
    Scalar z_home = 205;
    Scalar joint_limit_deg = 90;
    std::array<Scalar, 3> limb_azimuths_deg{0, 120, 240};

    void validate() const {
        if (!(base_radius > 0 && effector_radius > 0 && upper_arm > 0 && forearm > 0))
            throw Error(ErrorKind::InvalidArgument, "geometry lengths must be strictly positive");
        if (!(forearm > upper_arm))
            throw Error(ErrorKind::InvalidArgument, "forearm must be longer than upper arm");
        if (!(joint_limit_deg > 0 && joint_limit_deg <= 180))
            throw Error(ErrorKind::InvalidArgument, "joint limit must lie in (0, 180] deg");
        for (int i = 0; i < 3; ++i) {
            const Scalar expected = limb_azimuths_deg[0] + Scalar(120) * i;
            if (std::abs(limb_azimuths_deg[i] - expected) > Scalar(1e-9))
                throw Error(ErrorKind::InvalidArgument, "limb azimuths must be 120 deg apart");
        }
    }

    Eigen::Matrix<Scalar, 3, 1> radial(int limb) const {
        const Scalar a = deg2rad(limb_azimuths_deg[limb]);
        return {std::cos(a), std::sin(a), Scalar(0)};
    }

    Eigen::Matrix<Scalar, 3, 1> tangential(int limb) const {
        const Scalar a = deg2rad(limb_azimuths_deg[limb]);
        return {-std::sin(a), std::cos(a), Scalar(0)};
    }
};

namespace detail {

// Elbow-out solution for one limb, radians. `servo_point` is the effector
// pose expressed in the servo frame.
template <typename Scalar>
Scalar solve_limb(const DeltaGeometry<Scalar>& g, int limb, const Pose<Scalar>& servo_point) {
    const auto u = g.radial(limb);
    const auto v = g.tangential(limb);
    const Pose<Scalar> q = servo_point + (g.effector_radius - g.base_radius) * u;
    const Scalar a = q.dot(u);
    const Scalar t = q.dot(v);
    const Scalar h = q.z();
    const Scalar l1 = g.upper_arm;
    const Scalar l2 = g.forearm;

    // a cos(theta) + h sin(theta) = k
    const Scalar k = (a * a + t * t + h * h + l1 * l1 - l2 * l2) / (Scalar(2) * l1);
    const Scalar rho = std::hypot(a, h);
    if (rho <= Scalar(0) || std::abs(k) > rho)
        throw Error(ErrorKind::Unreachable, "limb " + std::to_string(limb) + " cannot reach target");

    const Scalar alpha = std::atan2(h, a);
    const Scalar delta = std::acos(std::clamp(k / rho, Scalar(-1), Scalar(1)));
    Scalar first = std::remainder(alpha - delta, Scalar(2) * std::numbers::pi_v<Scalar>);
    Scalar second = std::remainder(alpha + delta, Scalar(2) * std::numbers::pi_v<Scalar>);
    // Elbow-out puts the knee further from the central axis: larger cos(theta).
    if (std::cos(second) > std::cos(first)) std::swap(first, second);
    return first;
}

template <typename Scalar>
Pose<Scalar> elbow_sphere_center(const DeltaGeometry<Scalar>& g, int limb, Scalar theta_rad) {
    const auto u = g.radial(limb);
    const Pose<Scalar> z = Pose<Scalar>::UnitZ();
    return (g.base_radius - g.effector_radius) * u +
           g.upper_arm * (std::cos(theta_rad) * u + std::sin(theta_rad) * z);
}

}  // namespace detail

/// Servo angles placing the effector at `target` (actuator frame, mm).
/// Throws Unreachable or JointLimit.
template <typename Scalar>
JointAngles<Scalar> inverse_kinematics(const DeltaGeometry<Scalar>& geom, const Pose<Scalar>& target) {
    geom.validate();
    const Pose<Scalar> servo_point = target + Pose<Scalar>(0, 0, geom.z_home);
    JointAngles<Scalar> out;
    for (int limb = 0; limb < 3; ++limb) {
        const Scalar deg = rad2deg(detail::solve_limb(geom, limb, servo_point));
        if (std::abs(deg) > geom.joint_limit_deg)
            throw Error(ErrorKind::JointLimit,
                        "limb " + std::to_string(limb) + " needs " + std::to_string(deg) + " deg");
        out[limb] = deg;
    }
    return out;
}

/// Effector pose for the given servo angles: intersection of the three
/// forearm spheres, taking the solution on the target side (+Z).
template <typename Scalar>
Pose<Scalar> forward_kinematics(const DeltaGeometry<Scalar>& geom, const JointAngles<Scalar>& joints) {
    geom.validate();
    std::array<Pose<Scalar>, 3> c;
    for (int limb = 0; limb < 3; ++limb)
        c[limb] = detail::elbow_sphere_center(geom, limb, deg2rad(joints[limb]));

    const Pose<Scalar> d21 = c[1] - c[0];
    const Pose<Scalar> d31 = c[2] - c[0];
    const Scalar d = d21.norm();
    const Scalar eps = Scalar(1e-12) * (Scalar(1) + geom.forearm);
    if (d < eps) throw Error(ErrorKind::NoIntersection, "coincident forearm spheres");
    const Pose<Scalar> ex = d21 / d;
    const Scalar i = ex.dot(d31);
    Pose<Scalar> ey = d31 - i * ex;
    const Scalar j = ey.norm();
    if (j < eps) throw Error(ErrorKind::NoIntersection, "collinear forearm spheres");
    ey /= j;
    const Pose<Scalar> ez = ex.cross(ey);

    // Equal radii simplify the trilateration terms.
    const Scalar x = d / Scalar(2);
    const Scalar y = (i * i + j * j - Scalar(2) * i * x) / (Scalar(2) * j);
    const Scalar z2 = geom.forearm * geom.forearm - x * x - y * y;
    if (z2 < Scalar(0)) throw Error(ErrorKind::NoIntersection, "forearm spheres do not meet");
    const Scalar z = std::sqrt(z2);

    const Pose<Scalar> base = c[0] + x * ex + y * ey;
    const Pose<Scalar> p1 = base + z * ez;
    const Pose<Scalar> p2 = base - z * ez;
    Pose<Scalar> p = p1.z() >= p2.z() ? p1 : p2;
    p.z() -= geom.z_home;
    return p;
}

/// Axis-aligned box in the actuator frame.
template <typename Scalar>
struct WorkspaceBox {
    Scalar xy_half_extent = 60;
    Scalar z_min = 0;
    Scalar z_max = 110;

    bool contains(const Pose<Scalar>& p) const {
        return std::abs(p.x()) <= xy_half_extent && std::abs(p.y()) <= xy_half_extent &&
               p.z() >= z_min && p.z() <= z_max;
    }
};

template <typename Scalar>
struct WorkspaceReport {
    std::size_t samples = 0;
    std::size_t reachable = 0;
    double fraction = 0;
    bool passed = false;
    Scalar max_abs_joint_deg = 0;
    std::vector<Pose<Scalar>> failures;  // first few only
};

/// Sweeps the workspace box on a regular grid and checks IK at every node.
template <typename Scalar>
WorkspaceReport<Scalar> validate_workspace(const DeltaGeometry<Scalar>& geom,
                                           const WorkspaceBox<Scalar>& box = {},
                                           Scalar grid_step = 5) {
    geom.validate();
    WorkspaceReport<Scalar> report;
    const int nxy = static_cast<int>(std::floor(2 * box.xy_half_extent / grid_step + Scalar(1e-9)));
    const int nz = static_cast<int>(std::floor((box.z_max - box.z_min) / grid_step + Scalar(1e-9)));
    for (int ix = 0; ix <= nxy; ++ix) {
        for (int iy = 0; iy <= nxy; ++iy) {
            for (int iz = 0; iz <= nz; ++iz) {
                const Pose<Scalar> p(-box.xy_half_extent + ix * grid_step,
                                     -box.xy_half_extent + iy * grid_step, box.z_min + iz * grid_step);
                ++report.samples;
                try {
                    const auto joints = inverse_kinematics(geom, p);
                    report.max_abs_joint_deg =
                        std::max(report.max_abs_joint_deg, joints.degrees.cwiseAbs().maxCoeff());
                    ++report.reachable;
                } catch (const Error&) {
                    if (report.failures.size() < 16) report.failures.push_back(p);
                }
            }
        }
    }
    report.fraction = report.samples ? double(report.reachable) / double(report.samples) : 0.0;
    report.passed = report.samples > 0 && report.reachable == report.samples;
    return report;
}

}  // namespace deltacharger::kinematics
