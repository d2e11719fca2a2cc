#pragma once

// Synthetic contact model: tactile frames rendered from a misalignment
// state, the geometric short-circuit check, and servo current versus
// penetration depth.
//
// Frames are expressed in the effector plane as seen from the target:
// x horizontal, y vertical. Electrode A (upper) sits left of the actuator
// axis and electrode B (lower) right of it; each carries one 10 x 10 sensor
// flush with its outer end. The target robot carries two horizontal bars.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "deltacharger/polygon.hpp"

namespace deltacharger::contact {

inline constexpr int kGridSide = 10;
inline constexpr int kSensors = 2;
inline constexpr int kFeatures = kSensors * kGridSide * kGridSide;

/// Effector pose error relative to the target electrodes.
struct MisalignmentState {
    double phi_deg = 0;  // rotation about the actuator Z axis
    double dx_mm = 0;    // horizontal, effector minus target
    double dy_mm = 0;    // vertical, effector minus target
    double dz_mm = 0;    // penetration: commanded depth minus contact depth

    /// Throws InvalidArgument outside |phi| <= 15 deg, |dx|, |dy| <= 25 mm.
    void validate() const;
};

using Grid = Eigen::Matrix<double, kGridSide, kGridSide, Eigen::RowMajor>;
using FeatureVector = Eigen::Matrix<double, kFeatures, 1>;

struct TactileFrame {
    std::array<Grid, kSensors> sensors{Grid::Zero(), Grid::Zero()};
    double rate_hz = 120;

    /// Sensor-major, row-major: index = sensor * 100 + row * 10 + col.
    FeatureVector flatten() const;
    static TactileFrame from_features(const Eigen::Ref<const Eigen::VectorXd>& features);
    bool all_zero() const;
};

struct SensorNoise {
    double cell_sigma = 0.15;      // multiplicative log-normal per cell
    double dropout = 0.02;         // probability a cell reads 0
    double gain_sigma = 0.20;      // log-normal per-frame contact force variation
    double floor_n = 1.0;          // readings below this are 0
    double max_n = 9.0;
};

struct ElectrodePlan {
    double electrode_width = 48.0;                   // charger electrode footprint, x
    double electrode_height = std::sqrt(580.0);      // charger electrode footprint, y
    double electrode_center_x = 32.0;                // |x| of each electrode center
    double bar_length = 104.0;                       // target bar, x
    double bar_height = 4.0;                         // target bar, y
    double bar_center_y = 12.54;                     // |y| of each bar center; sets the short onset
    double sensor_side = std::sqrt(580.0);           // 5.8 cm^2 active area
    double contact_envelope_mm = 10.0;               // beyond this |dx| or |dy| nothing touches
    double nominal_pressure_n = 6.0;                 // full-cell force at zero misalignment
    double nominal_penetration_mm = 15.0;
    double penetration_gain = 0.01;                  // relative force change per mm of extra depth
    double rate_hz = 120.0;
    SensorNoise noise;

    /// Edge-to-edge vertical gap between the two target bars.
    double bar_gap() const { return 2 * bar_center_y - bar_height; }
    double sensor_center_x() const { return electrode_center_x + electrode_width / 2 - sensor_side / 2; }

    geometry::Polygon electrode(int index) const;
    geometry::Polygon sensor_cell(int sensor, int row, int col) const;
    /// Target bar `index` mapped into the effector frame for `state`.
    geometry::Polygon bar_in_effector(int index, const MisalignmentState& state) const;

    void validate() const;
};

/// Noise-free per-cell contact fractions and electrode/bar overlap areas.
struct Coverage {
    std::array<Grid, kSensors> cells{Grid::Zero(), Grid::Zero()};
    std::array<double, kSensors> electrode_overlap{0, 0};
};

Coverage contact_coverage(const ElectrodePlan& plan, const MisalignmentState& state);

/// Deterministic in (plan, state, seed). Returns an all-zero frame when the
/// state is outside the contact envelope or the penetration is negative.
TactileFrame render_frame(const ElectrodePlan& plan, const MisalignmentState& state, std::uint64_t seed);

/// Same pipeline with every noise source disabled.
TactileFrame render_frame_noiseless(const ElectrodePlan& plan, const MisalignmentState& state);

enum class SafetyVerdict { Safe, Short, NoContact };

constexpr std::string_view to_string(SafetyVerdict v) {
    switch (v) {
        case SafetyVerdict::Safe: return "Safe";
        case SafetyVerdict::Short: return "Short";
        case SafetyVerdict::NoContact: return "NoContact";
    }
    return "?";
}

/// Short when either charger electrode overlaps both target bars.
SafetyVerdict short_circuit_oracle(const ElectrodePlan& plan, const MisalignmentState& state);

/// Bisects the Safe -> Short transition in phi at dx = dy = 0.
double critical_angle(const ElectrodePlan& plan, double lo_deg = 0.0, double hi_deg = 15.0,
                      double tolerance_deg = 1e-6);

struct CurrentModel {
    double free_current = 0.10;  // A
    double slope = 0.02;         // A per mm of penetration
    double hold_low = 0.40;      // lower edge of the hold band
    double overheat = 0.50;      // upper edge; continuous load above this overheats

    void validate() const;
};

double servo_current(const CurrentModel& model, double penetration_mm);

/// Force-weighted (row, col) centroid of one sensor; nullopt when empty.
std::optional<Eigen::Vector2d> centroid(const TactileFrame& frame, int sensor);

}  // namespace deltacharger::contact
