#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "deltacharger/classifier.hpp"
#include "deltacharger/dataset.hpp"
#include "deltacharger/network.hpp"
#include "deltacharger/train.hpp"

namespace deltacharger {

enum class ModelKind { Cnn, Nn, Knn, DecisionTree, RandomForest, SvmSgd, LogRegCV };

inline constexpr ModelKind kAllModels[] = {ModelKind::Cnn,          ModelKind::Nn,     ModelKind::Knn,
                                           ModelKind::DecisionTree, ModelKind::RandomForest,
                                           ModelKind::SvmSgd,       ModelKind::LogRegCV};

/// CLI names: cnn, nn, knn, dt, rf, svm, logreg.
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
bool is_deep(ModelKind kind);

class DeepClassifier final : public Classifier {
public:
    explicit DeepClassifier(nn::Network net) : net_(std::move(net)) {}

    int classes() const override { return net_.output_width(); }
    /// Softmax of eval-mode logits. Runs on a private copy, so concurrent callers are safe.
    Eigen::MatrixXd predict_proba(const FeatureMatrix& x) const override;
    Blocks to_blocks() const override;
    const nn::Network& network() const { return net_; }

private:
    nn::Network net_;
};

struct ModelArtifact {
    ModelKind kind = ModelKind::Cnn;
    TaskKind task = TaskKind::Angle;
    int classes = 0;
    std::string spec;   // network spec for deep models, a short description otherwise
    ConfigMap config;   // training config and hyperparameters
    std::shared_ptr<const Classifier> model;
    double train_seconds = 0;  // wall clock; not serialized
    nn::TrainHistory history;  // deep models only; not serialized

    Eigen::MatrixXd predict_proba(const FeatureMatrix& x) const;
    std::vector<int> predict(const FeatureMatrix& x) const;
    Blocks blocks() const { return model->to_blocks(); }

    /// Rebuilds the classifier from serialized parts. Throws MalformedFile on inconsistent blocks.
    static ModelArtifact assemble(ModelKind kind, TaskKind task, int classes, std::string spec, ConfigMap config,
                                  const Blocks& blocks);
};

/// Trains `kind` on `train`; deep models use `validation` for the plateau scheduler.
/// Throws TaskMismatch when the two sets disagree or are unlabeled position data,
/// Degenerate when the training set has a single class.
ModelArtifact fit_model(ModelKind kind, const LabeledDataset& train, const LabeledDataset& validation,
                        const nn::TrainConfig& config);

struct EvalReport {
    TaskKind task = TaskKind::Angle;
    ModelKind model = ModelKind::Cnn;
    std::size_t samples = 0;
    double accuracy = 0;
    Eigen::MatrixXi confusion;  // rows = truth, cols = prediction
    double ms_per_sample = 0;   // mean over all repetitions
    double train_seconds = 0;
};

/// Throws TaskMismatch when the dataset task differs from the model task.
EvalReport evaluate(const ModelArtifact& model, const LabeledDataset& data, int repetitions = 3);

}  // namespace deltacharger
