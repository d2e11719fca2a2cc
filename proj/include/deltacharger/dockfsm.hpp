#pragma once

// Safe-docking state machine. `step` is the pure transition relation;
// `run_episode` drives it against the contact simulator and a perception stack.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deltacharger/contact.hpp"
#include "deltacharger/kinematics.hpp"
#include "deltacharger/model.hpp"

namespace deltacharger::dock {

using Pose = kinematics::Pose<double>;

enum class Phase { ReceiveCoords, MoveToTarget, BackOff, StepIn, MeasureAngle, AlignXY, Charging, Failed, Done };
enum class Outcome { Running, Charged, FailedAngle, FailedNoContact, FailedLoopLimit };

std::string_view to_string(Phase phase);
std::string_view to_string(Outcome outcome);
Phase parse_phase(std::string_view name);
Outcome parse_outcome(std::string_view name);

struct DockParams {
    contact::CurrentModel current;
    double press_mm = 15.0;        // commanded depth beyond the reported electrode plane
    double backoff_mm = 30.0;
    double step_mm = 5.0;
    int max_backoffs = 2;          // the first back-off plus one re-entry
    int max_align_loops = 15;
    double z_max = 110.0;          // workspace limit for StepIn
    double min_posterior = 0.5;
    double vision_error_max = 10.0;
    Pose home = Pose::Zero();      // actuator frame, i.e. (0, 0, z_home) at the servos

    void validate() const;
};

struct AnglePrediction {
    int cls = 0;
    double posterior = 1.0;
    bool out_of_envelope = false;  // state outside the trained 0-6 deg range
};

struct PositionPrediction {
    int vertical = 2;
    int horizontal = 2;
};

/// What the environment reports for one transition. Which fields are
/// required depends on the phase; missing ones raise IllegalTransition.
struct StepInputs {
    std::optional<Pose> reported;
    std::optional<double> current;
    std::optional<bool> contact;  // false when the tactile frame is all zero
    std::optional<AnglePrediction> angle;
    std::optional<PositionPrediction> position;
};

struct DockState {
    Phase phase = Phase::ReceiveCoords;
    Pose pose = Pose::Zero();
    int loop = 0;
    int backoffs = 0;
    double last_current = 0;
    std::optional<AnglePrediction> last_angle;
    std::optional<PositionPrediction> last_position;
    Outcome outcome = Outcome::Running;

    bool terminal() const { return phase == Phase::Failed || phase == Phase::Done; }
    bool operator==(const DockState& other) const;
};

/// Single transition; pure in (state, inputs, params).
DockState step(const DockState& state, const StepInputs& inputs, const DockParams& params = {});

/// Largest number of transitions any episode can take with these parameters.
int transition_bound(const DockParams& params = {});

struct Scenario {
    double phi_deg = 0;
    Pose electrode = Pose(0, 0, 80);  // true electrode position, actuator frame
    Pose vision_error = Pose::Zero();  // reported = electrode + vision_error

    Pose reported() const { return electrode + vision_error; }
    contact::MisalignmentState misalignment(const Pose& effector) const;
};

/// Random scenario: phi uniform in [0, 15] deg, vision error uniform within the stub bound.
Scenario random_scenario(std::uint64_t seed, const DockParams& params = {});

class Perception {
public:
    virtual ~Perception() = default;
    virtual AnglePrediction angle(const contact::TactileFrame& frame, const contact::MisalignmentState& truth) const = 0;
    virtual PositionPrediction position(const contact::TactileFrame& frame,
                                        const contact::MisalignmentState& truth) const = 0;
};

/// Ground-truth labels; the perfect-perception upper bound.
class OraclePerception final : public Perception {
public:
    AnglePrediction angle(const contact::TactileFrame& frame, const contact::MisalignmentState& truth) const override;
    PositionPrediction position(const contact::TactileFrame& frame,
                                const contact::MisalignmentState& truth) const override;
};

/// Trained classifiers. The envelope flag still comes from the simulator state.
class ModelPerception final : public Perception {
public:
    ModelPerception(ModelArtifact angle, ModelArtifact vertical, ModelArtifact horizontal);
    AnglePrediction angle(const contact::TactileFrame& frame, const contact::MisalignmentState& truth) const override;
    PositionPrediction position(const contact::TactileFrame& frame,
                                const contact::MisalignmentState& truth) const override;

private:
    ModelArtifact angle_, vertical_, horizontal_;
};

struct TraceEntry {
    int index = 0;
    DockState state;  // after the transition
    StepInputs inputs;
    contact::SafetyVerdict verdict = contact::SafetyVerdict::NoContact;  // at the new pose
};

struct DockEpisode {
    std::uint64_t seed = 0;
    Scenario scenario;
    DockState initial;
    std::vector<TraceEntry> trace;
    Outcome outcome = Outcome::Running;

    /// Current measured by the last StepIn before MeasureAngle, if reached.
    std::optional<double> final_stepin_current() const;
    bool reached(Phase phase) const;
};

DockEpisode run_episode(const Scenario& scenario, const Perception& perception, std::uint64_t seed,
                        const DockParams& params = {}, const contact::ElectrodePlan& plan = {});

/// Feeds the recorded inputs through `step` again; returns the resulting states.
std::vector<DockState> replay(const DockEpisode& episode, const DockParams& params = {});

/// One line per transition plus header and outcome lines.
std::string format_trace(const DockEpisode& episode, int episode_id);

struct TraceSummary {
    int episode_id = 0;
    std::uint64_t seed = 0;
    int transitions = 0;
    Outcome outcome = Outcome::Running;
    std::vector<std::string> phases;
};

/// Parses concatenated format_trace output. Throws MalformedFile.
std::vector<TraceSummary> parse_traces(std::string_view text, const std::string& source = "<memory>");

}  // namespace deltacharger::dock
