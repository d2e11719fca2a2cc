#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "deltacharger/contact.hpp"
#include "deltacharger/tasks.hpp"

namespace deltacharger {

/// What the label column of a dataset means. Position files carry both axes
/// in one label (vertical * 5 + horizontal) and are relabeled before training.
enum class DatasetKind { Angle, Position, Vertical, Horizontal };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);
DatasetKind dataset_kind_of(TaskKind task);
/// Throws TaskMismatch for Position, which is not a trainable task by itself.
TaskKind task_of(DatasetKind kind);
int class_count(DatasetKind kind);

struct Sample {
    contact::MisalignmentState truth;
    contact::FeatureVector features;
    int label = 0;
};

struct LabeledDataset {
    DatasetKind kind = DatasetKind::Angle;
    std::uint64_t seed = 0;
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }
    /// n x 200, row-major, one sample per row.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> features() const;
    std::vector<int> labels() const;
    std::vector<int> class_counts() const;
    LabeledDataset subset(std::span<const std::size_t> indices) const;
};

struct GenerationConfig {
    contact::ElectrodePlan plan;
    int angle_per_class = 100;
    double capture_ratio = 0.25;   // residual fraction of the initial XY offset at contact
    double initial_offset_max = 20.0;
    double initial_offset_step = 4.0;
    int position_per_cell = 20;
    double position_step = 5.0;
    double position_jitter = 1.0;  // uniform +/- around each grid target
};

/// 6 x angle_per_class samples, phi = 0..5 deg, nominal penetration.
LabeledDataset generate_angle_dataset(std::uint64_t seed, const GenerationConfig& config = {});
/// 5 x 5 grid of (dx, dy) targets, position_per_cell renders each, phi = 0.
LabeledDataset generate_position_dataset(std::uint64_t seed, const GenerationConfig& config = {});

/// Position dataset -> Vertical or Horizontal labels. Other kinds must already match.
LabeledDataset relabel(const LabeledDataset& data, TaskKind task);

/// Stratified, seeded split. Each class sends round(train_fraction * n_c) samples to train.
/// Both halves keep the original sample order. Throws Degenerate for a class with < 2 samples.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double train_fraction,
                                                std::uint64_t seed);

/// Rounds to the 6-decimal file precision and removes negative zero.
double quantize(double v);

}  // namespace deltacharger
