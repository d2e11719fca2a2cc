#include "deltacharger/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "deltacharger/error.hpp"
#include "deltacharger/rng.hpp"

namespace deltacharger {

std::string_view to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::Angle: return "angle";
        case DatasetKind::Position: return "position";
        case DatasetKind::Vertical: return "vertical";
        case DatasetKind::Horizontal: return "horizontal";
    }
    return "?";
}

DatasetKind parse_dataset_kind(std::string_view name) {
    if (name == "position") return DatasetKind::Position;
    return dataset_kind_of(parse_task(name));
}

DatasetKind dataset_kind_of(TaskKind task) {
    switch (task) {
        case TaskKind::Angle: return DatasetKind::Angle;
        case TaskKind::Vertical: return DatasetKind::Vertical;
        case TaskKind::Horizontal: return DatasetKind::Horizontal;
    }
    return DatasetKind::Angle;
}

TaskKind task_of(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::Angle: return TaskKind::Angle;
        case DatasetKind::Vertical: return TaskKind::Vertical;
        case DatasetKind::Horizontal: return TaskKind::Horizontal;
        case DatasetKind::Position: break;
    }
    throw Error(ErrorKind::TaskMismatch, "position data must be relabeled as vertical or horizontal");
}

int class_count(DatasetKind kind) {
    if (kind == DatasetKind::Position) return 25;
    return TaskSpec::of(task_of(kind)).classes;
}

double quantize(double v) {
    const double q = std::round(v * 1e6) / 1e6;
    return q == 0.0 ? 0.0 : q;
}

Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> LabeledDataset::features() const {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(samples.size(), contact::kFeatures);
    for (std::size_t i = 0; i < samples.size(); ++i) x.row(i) = samples[i].features.transpose();
    return x;
}

std::vector<int> LabeledDataset::labels() const {
    std::vector<int> y;
    y.reserve(samples.size());
    for (const auto& s : samples) y.push_back(s.label);
    return y;
}

std::vector<int> LabeledDataset::class_counts() const {
    std::vector<int> counts(class_count(kind), 0);
    for (const auto& s : samples) counts.at(s.label)++;
    return counts;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
    LabeledDataset out{kind, seed, {}};
    out.samples.reserve(indices.size());
    for (auto i : indices) out.samples.push_back(samples.at(i));
    return out;
}

namespace {

Sample make_sample(const contact::ElectrodePlan& plan, contact::MisalignmentState truth, std::uint64_t seed) {
    truth.phi_deg = quantize(truth.phi_deg);
    truth.dx_mm = quantize(truth.dx_mm);
    truth.dy_mm = quantize(truth.dy_mm);
    truth.dz_mm = quantize(truth.dz_mm);
    Sample s;
    s.truth = truth;
    s.features = contact::render_frame(plan, truth, seed).flatten().unaryExpr([](double v) { return quantize(v); });
    return s;
}

}  // namespace

LabeledDataset generate_angle_dataset(std::uint64_t seed, const GenerationConfig& config) {
    const TaskSpec task = TaskSpec::of(TaskKind::Angle);
    const int grid_points = static_cast<int>(std::lround(2 * config.initial_offset_max / config.initial_offset_step)) + 1;
    LabeledDataset data{DatasetKind::Angle, seed, {}};
    data.samples.reserve(task.classes * config.angle_per_class);
    std::uint64_t index = 0;
    for (int k = 0; k < task.classes; ++k) {
        for (int i = 0; i < config.angle_per_class; ++i, ++index) {
            Rng rng(derive_seed(seed, index));
            std::uniform_int_distribution<int> pick(0, grid_points - 1);
            const double ox = -config.initial_offset_max + config.initial_offset_step * pick(rng);
            const double oy = -config.initial_offset_max + config.initial_offset_step * pick(rng);
            const contact::MisalignmentState truth{task.edges[k], config.capture_ratio * ox, config.capture_ratio * oy,
                                                   config.plan.nominal_penetration_mm};
            Sample s = make_sample(config.plan, truth, rng());
            s.label = label_of(task, s.truth);
            data.samples.push_back(std::move(s));
        }
    }
    return data;
}

LabeledDataset generate_position_dataset(std::uint64_t seed, const GenerationConfig& config) {
    const TaskSpec vertical = TaskSpec::of(TaskKind::Vertical);
    const TaskSpec horizontal = TaskSpec::of(TaskKind::Horizontal);
    const double limit = config.plan.contact_envelope_mm;
    LabeledDataset data{DatasetKind::Position, seed, {}};
    data.samples.reserve(25 * config.position_per_cell);
    std::uint64_t index = 0;
    for (int v = 0; v < 5; ++v) {
        for (int h = 0; h < 5; ++h) {
            for (int a = 0; a < config.position_per_cell; ++a, ++index) {
                Rng rng(derive_seed(seed, index));
                std::uniform_real_distribution<double> jitter(-config.position_jitter, config.position_jitter);
                const double dx = std::clamp((h - 2) * config.position_step + jitter(rng), -limit, limit);
                const double dy = std::clamp((v - 2) * config.position_step + jitter(rng), -limit, limit);
                Sample s = make_sample(config.plan, {0.0, dx, dy, config.plan.nominal_penetration_mm}, rng());
                s.label = label_of(vertical, s.truth) * 5 + label_of(horizontal, s.truth);
                data.samples.push_back(std::move(s));
            }
        }
    }
    return data;
}

LabeledDataset relabel(const LabeledDataset& data, TaskKind task) {
    const DatasetKind target = dataset_kind_of(task);
    if (data.kind == target) return data;
    if (data.kind != DatasetKind::Position)
        throw Error(ErrorKind::TaskMismatch, "cannot relabel " + std::string(to_string(data.kind)) + " data as " +
                                                 std::string(to_string(task)));
    if (task == TaskKind::Angle) throw Error(ErrorKind::TaskMismatch, "position data has no angle labels");
    LabeledDataset out = data;
    out.kind = target;
    for (auto& s : out.samples) s.label = task == TaskKind::Vertical ? s.label / 5 : s.label % 5;
    return out;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double train_fraction,
                                                std::uint64_t seed) {
    if (!(train_fraction > 0 && train_fraction < 1))
        throw Error(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
    const int classes = class_count(data.kind);
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < data.samples.size(); ++i) by_class.at(data.samples[i].label).push_back(i);

    std::vector<std::size_t> train, val;
    for (int c = 0; c < classes; ++c) {
        auto& members = by_class[c];
        if (members.empty()) continue;
        if (members.size() < 2)
            throw Error(ErrorKind::Degenerate, "class " + std::to_string(c) + " has fewer than 2 samples");
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        std::shuffle(members.begin(), members.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * members.size()));
        train.insert(train.end(), members.begin(), members.begin() + n_train);
        val.insert(val.end(), members.begin() + n_train, members.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
    return {data.subset(train), data.subset(val)};
}

}  // namespace deltacharger
