#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "deltacharger/contact.hpp"

namespace deltacharger {

enum class TaskKind { Angle, Vertical, Horizontal };

std::string_view to_string(TaskKind kind);
TaskKind parse_task(std::string_view name);

/// Class layout for one prediction task.
///  - Angle: six 1-degree bins [k, k+1), k = 0..5.
///  - Vertical / Horizontal: five classes centred at -10, -5, 0, 5, 10 mm,
///    each owning +/-2.5 mm.
struct TaskSpec {
    TaskKind kind = TaskKind::Angle;
    int classes = 6;
    std::vector<double> edges;    // angle bin edges (classes + 1)
    std::vector<double> centers;  // class centres

    static TaskSpec of(TaskKind kind);

    /// Index of the class whose centre is 0 mm (position tasks only).
    int zero_class() const;
    /// Upper end of the labelable range (6 deg for Angle, 12.5 mm otherwise).
    double envelope() const;
};

/// Throws OutOfRange when the state lies outside the task's labelable range.
/// Angle bins close on the left. Position ties go to the centre nearer zero.
int label_of(const TaskSpec& task, const contact::MisalignmentState& truth);

}  // namespace deltacharger
