#include "deltacharger/tasks.hpp"

#include <cmath>

#include "deltacharger/error.hpp"

namespace deltacharger {

std::string_view to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::Angle: return "angle";
        case TaskKind::Vertical: return "vertical";
        case TaskKind::Horizontal: return "horizontal";
    }
    return "?";
}

TaskKind parse_task(std::string_view name) {
    if (name == "angle") return TaskKind::Angle;
    if (name == "vertical") return TaskKind::Vertical;
    if (name == "horizontal") return TaskKind::Horizontal;
    throw Error(ErrorKind::InvalidArgument, "unknown task '" + std::string(name) + "'");
}

TaskSpec TaskSpec::of(TaskKind kind) {
    TaskSpec spec;
    spec.kind = kind;
    if (kind == TaskKind::Angle) {
        spec.classes = 6;
        for (int k = 0; k <= 6; ++k) spec.edges.push_back(k);
        for (int k = 0; k < 6; ++k) spec.centers.push_back(k + 0.5);
    } else {
        spec.classes = 5;
        for (int k = 0; k <= 5; ++k) spec.edges.push_back(-12.5 + 5.0 * k);
        for (int k = 0; k < 5; ++k) spec.centers.push_back(-10.0 + 5.0 * k);
    }
    return spec;
}

int TaskSpec::zero_class() const {
    if (kind == TaskKind::Angle) throw Error(ErrorKind::InvalidArgument, "angle task has no zero-centre class");
    return 2;
}

double TaskSpec::envelope() const { return edges.back(); }

int label_of(const TaskSpec& task, const contact::MisalignmentState& truth) {
    if (task.kind == TaskKind::Angle) {
        const double phi = truth.phi_deg;
        if (!(phi >= task.edges.front() && phi < task.edges.back()))
            throw Error(ErrorKind::OutOfRange, "phi " + std::to_string(phi) + " deg outside angle bins");
        return static_cast<int>(std::floor(phi - task.edges.front()));
    }

    const double v = task.kind == TaskKind::Vertical ? truth.dy_mm : truth.dx_mm;
    if (!(std::abs(v) <= task.edges.back()))
        throw Error(ErrorKind::OutOfRange, std::string(to_string(task.kind)) + " offset " + std::to_string(v) +
                                               " mm outside +/-12.5");
    int best = 0;
    for (int k = 1; k < task.classes; ++k) {
        const double dk = std::abs(v - task.centers[k]);
        const double db = std::abs(v - task.centers[best]);
        if (dk < db || (dk == db && std::abs(task.centers[k]) < std::abs(task.centers[best]))) best = k;
    }
    return best;
}

}  // namespace deltacharger
