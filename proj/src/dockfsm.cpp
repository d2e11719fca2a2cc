#include "deltacharger/dockfsm.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "deltacharger/error.hpp"
#include "deltacharger/rng.hpp"
#include "deltacharger/tasks.hpp"

namespace deltacharger::dock {

namespace {

constexpr Phase kPhases[] = {Phase::ReceiveCoords, Phase::MoveToTarget, Phase::BackOff,
                             Phase::StepIn,        Phase::MeasureAngle, Phase::AlignXY,
                             Phase::Charging,      Phase::Failed,       Phase::Done};
constexpr Outcome kOutcomes[] = {Outcome::Running, Outcome::Charged, Outcome::FailedAngle, Outcome::FailedNoContact,
                                 Outcome::FailedLoopLimit};

template <typename T>
const T& need(const std::optional<T>& v, Phase phase, const char* what) {
    if (!v)
        throw Error(ErrorKind::IllegalTransition, std::string(to_string(phase)) + " requires " + what);
    return *v;
}

DockState fail(DockState s, Outcome why) {
    s.phase = Phase::Failed;
    s.outcome = why;
    return s;
}

}  // namespace

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::ReceiveCoords: return "ReceiveCoords";
        case Phase::MoveToTarget: return "MoveToTarget";
        case Phase::BackOff: return "BackOff";
        case Phase::StepIn: return "StepIn";
        case Phase::MeasureAngle: return "MeasureAngle";
        case Phase::AlignXY: return "AlignXY";
        case Phase::Charging: return "Charging";
        case Phase::Failed: return "Failed";
        case Phase::Done: return "Done";
    }
    return "?";
}

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Running: return "Running";
        case Outcome::Charged: return "Charged";
        case Outcome::FailedAngle: return "FailedAngle";
        case Outcome::FailedNoContact: return "FailedNoContact";
        case Outcome::FailedLoopLimit: return "FailedLoopLimit";
    }
    return "?";
}

Phase parse_phase(std::string_view name) {
    for (Phase p : kPhases)
        if (to_string(p) == name) return p;
    throw Error(ErrorKind::InvalidArgument, "unknown phase '" + std::string(name) + "'");
}

Outcome parse_outcome(std::string_view name) {
    for (Outcome o : kOutcomes)
        if (to_string(o) == name) return o;
    throw Error(ErrorKind::InvalidArgument, "unknown outcome '" + std::string(name) + "'");
}

void DockParams::validate() const {
    current.validate();
    if (!(press_mm >= 0 && backoff_mm > 0 && step_mm > 0) || max_backoffs < 1 || max_align_loops < 0)
        throw Error(ErrorKind::InvalidArgument, "invalid docking parameters");
    if (current.slope * step_mm > current.overheat - current.hold_low + 1e-12)
        throw Error(ErrorKind::InvalidArgument, "one step can jump over the hold band");
}

bool DockState::operator==(const DockState& o) const {
    auto same_angle = [](const std::optional<AnglePrediction>& a, const std::optional<AnglePrediction>& b) {
        if (a.has_value() != b.has_value()) return false;
        return !a || (a->cls == b->cls && a->posterior == b->posterior && a->out_of_envelope == b->out_of_envelope);
    };
    auto same_pos = [](const std::optional<PositionPrediction>& a, const std::optional<PositionPrediction>& b) {
        if (a.has_value() != b.has_value()) return false;
        return !a || (a->vertical == b->vertical && a->horizontal == b->horizontal);
    };
    return phase == o.phase && pose == o.pose && loop == o.loop && backoffs == o.backoffs &&
           last_current == o.last_current && same_angle(last_angle, o.last_angle) &&
           same_pos(last_position, o.last_position) && outcome == o.outcome;
}

DockState step(const DockState& state, const StepInputs& in, const DockParams& params) {
    DockState s = state;
    const auto& cm = params.current;
    switch (state.phase) {
        case Phase::ReceiveCoords: {
            const Pose& reported = need(in.reported, state.phase, "reported electrode coordinates");
            s.pose = reported + Pose(0, 0, params.press_mm);
            s.phase = Phase::MoveToTarget;
            return s;
        }
        case Phase::MoveToTarget: {
            s.last_current = need(in.current, state.phase, "a current reading");
            if (s.last_current > cm.overheat) {
                s.pose.z() -= params.backoff_mm;
                s.backoffs = 1;
                s.phase = Phase::BackOff;
            } else {
                s.phase = Phase::StepIn;
            }
            return s;
        }
        case Phase::BackOff: {
            s.last_current = need(in.current, state.phase, "a current reading");
            if (s.last_current <= cm.overheat) {
                s.phase = Phase::StepIn;
            } else if (s.backoffs < params.max_backoffs) {
                s.pose.z() -= params.backoff_mm;
                s.backoffs++;
            } else {
                return fail(s, Outcome::FailedLoopLimit);
            }
            return s;
        }
        case Phase::StepIn: {
            s.last_current = need(in.current, state.phase, "a current reading");
            if (s.last_current >= cm.hold_low) {
                s.phase = Phase::MeasureAngle;
            } else if (s.pose.z() + params.step_mm > params.z_max) {
                return fail(s, Outcome::FailedLoopLimit);
            } else {
                s.pose.z() += params.step_mm;
            }
            return s;
        }
        case Phase::MeasureAngle: {
            if (!need(in.contact, state.phase, "a contact flag")) return fail(s, Outcome::FailedNoContact);
            const AnglePrediction& a = need(in.angle, state.phase, "an angle prediction");
            s.last_angle = a;
            if (a.out_of_envelope || a.posterior < params.min_posterior) {
                s.pose = params.home;
                return fail(s, Outcome::FailedAngle);
            }
            s.phase = Phase::AlignXY;
            return s;
        }
        case Phase::AlignXY: {
            if (!need(in.contact, state.phase, "a contact flag")) return fail(s, Outcome::FailedNoContact);
            const PositionPrediction& p = need(in.position, state.phase, "a position prediction");
            s.last_position = p;
            const TaskSpec v = TaskSpec::of(TaskKind::Vertical);
            const TaskSpec h = TaskSpec::of(TaskKind::Horizontal);
            if (p.vertical < 0 || p.vertical >= v.classes || p.horizontal < 0 || p.horizontal >= h.classes)
                throw Error(ErrorKind::IllegalTransition, "position prediction outside class range");
            if (p.vertical == v.zero_class() && p.horizontal == h.zero_class()) {
                s.phase = Phase::Charging;
            } else if (s.loop >= params.max_align_loops) {
                s.phase = Phase::Charging;
            } else {
                s.pose.x() -= h.centers[p.horizontal];
                s.pose.y() -= v.centers[p.vertical];
                s.loop++;
            }
            return s;
        }
        case Phase::Charging:
            s.phase = Phase::Done;
            s.outcome = Outcome::Charged;
            return s;
        case Phase::Failed:
        case Phase::Done: break;
    }
    throw Error(ErrorKind::IllegalTransition, "no transition out of terminal phase " + std::string(to_string(state.phase)));
}

int transition_bound(const DockParams& p) {
    const auto& cm = p.current;
    const double pen_hold = (cm.hold_low - cm.free_current) / cm.slope;
    const double pen_over = (cm.overheat - cm.free_current) / cm.slope;
    // StepIn entry depth: after a back-off it exceeds pen_over - backoff; straight from
    // MoveToTarget it is at least press - vision error.
    const double entry = std::min(pen_over - p.backoff_mm, p.press_mm - p.vision_error_max);
    const int stepin = static_cast<int>(std::ceil(std::max(0.0, pen_hold - entry) / p.step_mm)) + 1;
    return 1 + 1 + p.max_backoffs + stepin + 1 + (p.max_align_loops + 1) + 1;
}

contact::MisalignmentState Scenario::misalignment(const Pose& effector) const {
    return {phi_deg, effector.x() - electrode.x(), effector.y() - electrode.y(), effector.z() - electrode.z()};
}

Scenario random_scenario(std::uint64_t seed, const DockParams& params) {
    Rng rng(seed);
    std::uniform_real_distribution<double> phi(0.0, 15.0);
    std::uniform_real_distribution<double> err(-params.vision_error_max, params.vision_error_max);
    Scenario s;
    s.phi_deg = phi(rng);
    s.vision_error.x() = err(rng);
    s.vision_error.y() = err(rng);
    s.vision_error.z() = err(rng);
    return s;
}

namespace {

bool in_trained_range(const contact::MisalignmentState& truth) {
    const TaskSpec a = TaskSpec::of(TaskKind::Angle);
    return truth.phi_deg >= a.edges.front() && truth.phi_deg < a.edges.back();
}

FeatureMatrix as_row(const contact::TactileFrame& frame) { return frame.flatten().transpose(); }

}  // namespace

AnglePrediction OraclePerception::angle(const contact::TactileFrame&, const contact::MisalignmentState& truth) const {
    if (!in_trained_range(truth)) return {0, 0.0, true};
    return {label_of(TaskSpec::of(TaskKind::Angle), truth), 1.0, false};
}

PositionPrediction OraclePerception::position(const contact::TactileFrame&,
                                              const contact::MisalignmentState& truth) const {
    return {label_of(TaskSpec::of(TaskKind::Vertical), truth), label_of(TaskSpec::of(TaskKind::Horizontal), truth)};
}

ModelPerception::ModelPerception(ModelArtifact angle, ModelArtifact vertical, ModelArtifact horizontal)
    : angle_(std::move(angle)), vertical_(std::move(vertical)), horizontal_(std::move(horizontal)) {
    if (angle_.task != TaskKind::Angle || vertical_.task != TaskKind::Vertical ||
        horizontal_.task != TaskKind::Horizontal)
        throw Error(ErrorKind::TaskMismatch, "perception needs angle, vertical and horizontal models in that order");
}

AnglePrediction ModelPerception::angle(const contact::TactileFrame& frame,
                                       const contact::MisalignmentState& truth) const {
    const Eigen::MatrixXd p = angle_.predict_proba(as_row(frame));
    Eigen::Index best;
    const double posterior = p.row(0).maxCoeff(&best);
    return {static_cast<int>(best), posterior, !in_trained_range(truth)};
}

PositionPrediction ModelPerception::position(const contact::TactileFrame& frame,
                                             const contact::MisalignmentState&) const {
    const FeatureMatrix x = as_row(frame);
    return {vertical_.predict(x)[0], horizontal_.predict(x)[0]};
}

std::optional<double> DockEpisode::final_stepin_current() const {
    for (const auto& e : trace)
        if (e.state.phase == Phase::MeasureAngle) return e.inputs.current;
    return std::nullopt;
}

bool DockEpisode::reached(Phase phase) const {
    for (const auto& e : trace)
        if (e.state.phase == phase) return true;
    return false;
}

DockEpisode run_episode(const Scenario& scenario, const Perception& perception, std::uint64_t seed,
                        const DockParams& params, const contact::ElectrodePlan& plan) {
    params.validate();
    DockEpisode ep;
    ep.seed = seed;
    ep.scenario = scenario;
    DockState s;
    s.pose = params.home;
    ep.initial = s;

    auto verdict_at = [&](const Pose& pose) { return contact::short_circuit_oracle(plan, scenario.misalignment(pose)); };

    const int bound = transition_bound(params);
    for (int index = 0; !s.terminal(); ++index) {
        if (index >= bound) throw Error(ErrorKind::IllegalTransition, "episode exceeded the transition bound");
        StepInputs in;
        const auto truth = scenario.misalignment(s.pose);
        switch (s.phase) {
            case Phase::ReceiveCoords: in.reported = scenario.reported(); break;
            case Phase::MoveToTarget:
            case Phase::BackOff:
            case Phase::StepIn: in.current = contact::servo_current(params.current, truth.dz_mm); break;
            case Phase::MeasureAngle:
            case Phase::AlignXY: {
                contact::TactileFrame frame;
                const bool renderable = std::abs(truth.dx_mm) <= 25 && std::abs(truth.dy_mm) <= 25;
                if (renderable) frame = contact::render_frame(plan, truth, derive_seed(seed, index));
                in.contact = !frame.all_zero();
                if (*in.contact) {
                    if (s.phase == Phase::MeasureAngle)
                        in.angle = perception.angle(frame, truth);
                    else
                        in.position = perception.position(frame, truth);
                }
                break;
            }
            default: break;
        }
        s = step(s, in, params);
        ep.trace.push_back({index, s, in, verdict_at(s.pose)});
    }
    ep.outcome = s.outcome;
    return ep;
}

std::vector<DockState> replay(const DockEpisode& episode, const DockParams& params) {
    std::vector<DockState> out;
    DockState s = episode.initial;
    for (const auto& e : episode.trace) {
        s = step(s, e.inputs, params);
        out.push_back(s);
    }
    return out;
}

namespace {

std::string prediction_text(const StepInputs& in) {
    if (in.angle) {
        std::string t = "angle=" + std::to_string(in.angle->cls) + "@" + format_double(in.angle->posterior);
        if (in.angle->out_of_envelope) t += "!envelope";
        return t;
    }
    if (in.position) return "v=" + std::to_string(in.position->vertical) + ";h=" + std::to_string(in.position->horizontal);
    if (in.contact && !*in.contact) return "nocontact";
    return "-";
}

}  // namespace

std::string format_trace(const DockEpisode& ep, int episode_id) {
    std::ostringstream out;
    const auto& sc = ep.scenario;
    out << "episode," << episode_id << ",seed=" << ep.seed << ",phi=" << format_double(sc.phi_deg)
        << ",electrode=" << format_double(sc.electrode.x()) << ";" << format_double(sc.electrode.y()) << ";"
        << format_double(sc.electrode.z()) << ",error=" << format_double(sc.vision_error.x()) << ";"
        << format_double(sc.vision_error.y()) << ";" << format_double(sc.vision_error.z()) << "\n";
    for (const auto& e : ep.trace) {
        out << "step," << e.index << "," << to_string(e.state.phase) << "," << format_double(e.state.pose.x()) << ","
            << format_double(e.state.pose.y()) << "," << format_double(e.state.pose.z()) << "," << e.state.loop << ","
            << (e.inputs.current ? format_double(*e.inputs.current) : "-") << "," << prediction_text(e.inputs) << ","
            << contact::to_string(e.verdict) << "\n";
    }
    out << "outcome," << episode_id << "," << to_string(ep.outcome) << "," << ep.trace.size() << "\n";
    return out.str();
}

std::vector<TraceSummary> parse_traces(std::string_view text, const std::string& source) {
    std::vector<TraceSummary> out;
    std::optional<TraceSummary> cur;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    auto bad = [&](const std::string& why) {
        return Error(ErrorKind::MalformedFile, source + ":" + std::to_string(line_no) + ": " + why);
    };
    auto fields = [](const std::string& l) {
        std::vector<std::string> f;
        std::stringstream ss(l);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        return f;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = fields(line);
        try {
            if (f[0] == "episode") {
                if (cur) throw bad("episode without outcome line");
                if (f.size() < 3 || f[2].rfind("seed=", 0) != 0) throw bad("bad episode header");
                cur = TraceSummary{};
                cur->episode_id = parse_int(f[1], "episode id");
                cur->seed = std::stoull(f[2].substr(5));
            } else if (f[0] == "step") {
                if (!cur || f.size() != 10) throw bad("step line outside an episode or with wrong field count");
                parse_phase(f[2]);
                cur->phases.push_back(f[2]);
            } else if (f[0] == "outcome") {
                if (!cur || f.size() != 4) throw bad("unexpected outcome line");
                cur->outcome = parse_outcome(f[2]);
                cur->transitions = parse_int(f[3], "transition count");
                if (cur->transitions != static_cast<int>(cur->phases.size()))
                    throw bad("transition count disagrees with step lines");
                out.push_back(*cur);
                cur.reset();
            } else {
                throw bad("unknown record '" + f[0] + "'");
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::MalformedFile) throw;
            throw bad(e.what());
        } catch (const std::exception& e) {
            throw bad(e.what());
        }
    }
    if (cur) throw Error(ErrorKind::MalformedFile, source + ": truncated trace, last episode has no outcome line");
    return out;
}

}  // namespace deltacharger::dock
