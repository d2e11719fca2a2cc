#include "deltacharger/contact.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "deltacharger/error.hpp"
#include "deltacharger/rng.hpp"

namespace deltacharger::contact {

using geometry::Point;
using geometry::Polygon;

void MisalignmentState::validate() const {
    if (!std::isfinite(phi_deg) || !std::isfinite(dx_mm) || !std::isfinite(dy_mm) || !std::isfinite(dz_mm))
        throw Error(ErrorKind::InvalidArgument, "misalignment state must be finite");
    if (std::abs(phi_deg) > 15.0) throw Error(ErrorKind::InvalidArgument, "phi outside [-15, 15] deg");
    if (std::abs(dx_mm) > 25.0 || std::abs(dy_mm) > 25.0)
        throw Error(ErrorKind::InvalidArgument, "dx/dy outside [-25, 25] mm");
}

FeatureVector TactileFrame::flatten() const {
    FeatureVector out;
    for (int s = 0; s < kSensors; ++s)
        out.segment<kGridSide * kGridSide>(s * kGridSide * kGridSide) =
            Eigen::Map<const Eigen::Matrix<double, kGridSide * kGridSide, 1>>(sensors[s].data());
    return out;
}

TactileFrame TactileFrame::from_features(const Eigen::Ref<const Eigen::VectorXd>& features) {
    if (features.size() != kFeatures)
        throw Error(ErrorKind::ShapeMismatch, "tactile frame needs 200 features");
    TactileFrame frame;
    for (int s = 0; s < kSensors; ++s)
        for (int i = 0; i < kGridSide * kGridSide; ++i)
            frame.sensors[s].data()[i] = features[s * kGridSide * kGridSide + i];
    return frame;
}

bool TactileFrame::all_zero() const {
    return std::all_of(sensors.begin(), sensors.end(), [](const Grid& g) { return g.isZero(0.0); });
}

void ElectrodePlan::validate() const {
    const bool positive = electrode_width > 0 && electrode_height > 0 && bar_length > 0 && bar_height > 0 &&
                          sensor_side > 0 && contact_envelope_mm > 0 && nominal_pressure_n > 0;
    if (!positive) throw Error(ErrorKind::InvalidArgument, "electrode plan dimensions must be positive");
    if (bar_gap() <= 0) throw Error(ErrorKind::InvalidArgument, "target bars overlap");
    if (sensor_side > electrode_width) throw Error(ErrorKind::InvalidArgument, "sensor wider than electrode");
    if (noise.cell_sigma < 0 || noise.gain_sigma < 0 || noise.dropout < 0 || noise.dropout >= 1 ||
        noise.floor_n < 0 || noise.max_n <= noise.floor_n)
        throw Error(ErrorKind::InvalidArgument, "invalid sensor noise parameters");
}

Polygon ElectrodePlan::electrode(int index) const {
    const double sign = index == 0 ? -1.0 : 1.0;
    return geometry::rectangle(Point(sign * electrode_center_x, -sign * bar_center_y), electrode_width,
                               electrode_height);
}

Polygon ElectrodePlan::sensor_cell(int sensor, int row, int col) const {
    const double sign = sensor == 0 ? -1.0 : 1.0;
    const Point center(sign * sensor_center_x(), -sign * bar_center_y);
    const double pitch = sensor_side / kGridSide;
    const double left = center.x() - sensor_side / 2 + col * pitch;
    const double top = center.y() + sensor_side / 2 - row * pitch;
    return geometry::rectangle(Point(left + pitch / 2, top - pitch / 2), pitch, pitch);
}

Polygon ElectrodePlan::bar_in_effector(int index, const MisalignmentState& state) const {
    const double y = index == 0 ? bar_center_y : -bar_center_y;
    const Polygon bar = geometry::rectangle(Point(0, y), bar_length, bar_height);
    // Effector pose in the target frame is p_t = R(phi) p_e + d, so p_e = R(-phi)(p_t - d).
    const Eigen::Rotation2Dd inverse(-state.phi_deg * std::numbers::pi / 180.0);
    const Point d(state.dx_mm, state.dy_mm);
    Polygon out;
    out.reserve(bar.size());
    for (const auto& p : bar) out.push_back(inverse * (p - d));
    return out;
}

Coverage contact_coverage(const ElectrodePlan& plan, const MisalignmentState& state) {
    Coverage cov;
    const double cell_area = std::pow(plan.sensor_side / kGridSide, 2);
    for (int s = 0; s < kSensors; ++s) {
        const Polygon bar = plan.bar_in_effector(s, state);
        cov.electrode_overlap[s] = geometry::overlap_area(plan.electrode(s), bar);
        for (int r = 0; r < kGridSide; ++r)
            for (int c = 0; c < kGridSide; ++c)
                cov.cells[s](r, c) = geometry::overlap_area(plan.sensor_cell(s, r, c), bar) / cell_area;
    }
    return cov;
}

namespace {

bool in_envelope(const ElectrodePlan& plan, const MisalignmentState& state) {
    return std::abs(state.dx_mm) <= plan.contact_envelope_mm && std::abs(state.dy_mm) <= plan.contact_envelope_mm;
}

TactileFrame render(const ElectrodePlan& plan, const MisalignmentState& state, std::uint64_t seed, bool noisy) {
    plan.validate();
    state.validate();
    TactileFrame frame;
    frame.rate_hz = plan.rate_hz;
    if (state.dz_mm < 0 || !in_envelope(plan, state)) return frame;

    const Coverage cov = contact_coverage(plan, state);
    const double nominal_overlap = contact_coverage(plan, MisalignmentState{}).electrode_overlap[0];

    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const double gain = noisy ? std::exp(plan.noise.gain_sigma * normal(rng)) : 1.0;
    const double depth =
        std::max(0.0, 1.0 + plan.penetration_gain * (state.dz_mm - plan.nominal_penetration_mm));

    for (int s = 0; s < kSensors; ++s) {
        // Each electrode carries the same load; a shorter contact concentrates it.
        const double overlap = cov.electrode_overlap[s];
        const double pressure =
            overlap > 0 ? plan.nominal_pressure_n * nominal_overlap / overlap * gain * depth : 0.0;
        for (int r = 0; r < kGridSide; ++r) {
            for (int c = 0; c < kGridSide; ++c) {
                double force = pressure * cov.cells[s](r, c);
                if (noisy) {
                    // Draw both variates for every cell so the stream layout is fixed.
                    const double n = normal(rng);
                    const double u = uniform(rng);
                    force *= std::exp(plan.noise.cell_sigma * n);
                    if (u < plan.noise.dropout) force = 0.0;
                }
                if (force < plan.noise.floor_n) force = 0.0;
                frame.sensors[s](r, c) = std::min(force, plan.noise.max_n);
            }
        }
    }
    return frame;
}

}  // namespace

TactileFrame render_frame(const ElectrodePlan& plan, const MisalignmentState& state, std::uint64_t seed) {
    return render(plan, state, seed, true);
}

TactileFrame render_frame_noiseless(const ElectrodePlan& plan, const MisalignmentState& state) {
    return render(plan, state, 0, false);
}

SafetyVerdict short_circuit_oracle(const ElectrodePlan& plan, const MisalignmentState& state) {
    if (!in_envelope(plan, state) || state.dz_mm < 0) return SafetyVerdict::NoContact;
    const std::array<Polygon, 2> bars{plan.bar_in_effector(0, state), plan.bar_in_effector(1, state)};
    for (int e = 0; e < 2; ++e) {
        const Polygon electrode = plan.electrode(e);
        const bool both = std::all_of(bars.begin(), bars.end(), [&](const Polygon& bar) {
            return geometry::overlap_area(electrode, bar) > 1e-12;
        });
        if (both) return SafetyVerdict::Short;
    }
    return SafetyVerdict::Safe;
}

double critical_angle(const ElectrodePlan& plan, double lo_deg, double hi_deg, double tolerance_deg) {
    auto verdict = [&](double phi) { return short_circuit_oracle(plan, MisalignmentState{phi, 0, 0, 0}); };
    if (verdict(lo_deg) != SafetyVerdict::Safe || verdict(hi_deg) != SafetyVerdict::Short)
        throw Error(ErrorKind::InvalidArgument, "critical angle not bracketed");
    while (hi_deg - lo_deg > tolerance_deg) {
        const double mid = 0.5 * (lo_deg + hi_deg);
        (verdict(mid) == SafetyVerdict::Short ? hi_deg : lo_deg) = mid;
    }
    return 0.5 * (lo_deg + hi_deg);
}

void CurrentModel::validate() const {
    if (free_current < 0 || slope <= 0 || !(hold_low < overheat))
        throw Error(ErrorKind::InvalidArgument, "invalid current model");
}

double servo_current(const CurrentModel& model, double penetration_mm) {
    if (penetration_mm < 0) return model.free_current;
    return std::max(0.0, model.free_current + model.slope * penetration_mm);
}

std::optional<Eigen::Vector2d> centroid(const TactileFrame& frame, int sensor) {
    const Grid& g = frame.sensors.at(sensor);
    const double total = g.sum();
    if (total <= 0) return std::nullopt;
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (int r = 0; r < kGridSide; ++r)
        for (int c = 0; c < kGridSide; ++c) acc += g(r, c) * Eigen::Vector2d(r, c);
    return acc / total;
}

}  // namespace deltacharger::contact
