#pragma once

// Shallow baselines: k-nearest neighbours, CART decision tree, random
// forest, linear SVM trained by SGD and cross-validated logistic regression.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "deltacharger/classifier.hpp"

namespace deltacharger::shallow {

/// Per-feature standardization fitted on training data; zero-variance features get scale 1.
struct Standardizer {
    Eigen::RowVectorXd mean, scale;

    static Standardizer fit(const FeatureMatrix& x);
    FeatureMatrix apply(const FeatureMatrix& x) const;
};

class Knn final : public Classifier {
public:
    Knn(FeatureMatrix x, std::vector<int> y, int classes, int k = 5);
    static std::unique_ptr<Knn> from_blocks(const Blocks& blocks, const ConfigMap& config);

    int classes() const override { return classes_; }
    Eigen::MatrixXd predict_proba(const FeatureMatrix& x) const override;
    Blocks to_blocks() const override;
    ConfigMap hyperparameters() const override;

private:
    FeatureMatrix x_;
    std::vector<int> y_;
    int classes_, k_;
};

/// Array-encoded binary tree. Leaves have feature -1 and carry class frequencies.
struct Tree {
    std::vector<int> feature;
    std::vector<double> threshold;  // go left when x[feature] <= threshold
    std::vector<int> left, right;
    std::vector<Eigen::VectorXd> value;

    int depth() const;
    std::size_t leaves() const;
    const Eigen::VectorXd& leaf(const double* x) const;
};

struct TreeOptions {
    int max_features = 0;  // 0 = all features, otherwise a random subset per split
    int max_depth = 0;     // 0 = unlimited
};

/// CART with Gini impurity and midpoint thresholds.
Tree grow_tree(const FeatureMatrix& x, std::span<const int> y, std::span<const std::size_t> rows, int classes,
               const TreeOptions& options, std::uint64_t seed);

class DecisionTree final : public Classifier {
public:
    DecisionTree(Tree tree, int classes) : tree_(std::move(tree)), classes_(classes) {}
    static std::unique_ptr<DecisionTree> fit(const FeatureMatrix& x, std::span<const int> y, int classes);
    static std::unique_ptr<DecisionTree> from_blocks(const Blocks& blocks, const ConfigMap& config);

    int classes() const override { return classes_; }
    Eigen::MatrixXd predict_proba(const FeatureMatrix& x) const override;
    Blocks to_blocks() const override;
    ConfigMap hyperparameters() const override;
    const Tree& tree() const { return tree_; }

private:
    Tree tree_;
    int classes_;
};

class RandomForest final : public Classifier {
public:
    RandomForest(std::vector<Tree> trees, int classes) : trees_(std::move(trees)), classes_(classes) {}
    /// Bootstrap sample per tree, max_features candidates per split, per-tree seeds derived from `seed`.
    static std::unique_ptr<RandomForest> fit(const FeatureMatrix& x, std::span<const int> y, int classes,
                                             std::uint64_t seed, int trees = 100, int max_features = 14);
    static std::unique_ptr<RandomForest> from_blocks(const Blocks& blocks, const ConfigMap& config);

    int classes() const override { return classes_; }
    /// Fraction of trees voting for each class.
    Eigen::MatrixXd predict_proba(const FeatureMatrix& x) const override;
    /// Class predicted by each tree for each row (n x trees).
    Eigen::MatrixXi tree_votes(const FeatureMatrix& x) const;
    Blocks to_blocks() const override;
    ConfigMap hyperparameters() const override;
    std::size_t size() const { return trees_.size(); }

private:
    std::vector<Tree> trees_;
    int classes_;
};

/// Linear model on standardized features: scores = z W^T + b.
class LinearModel final : public Classifier {
public:
    LinearModel(Standardizer scaler, Eigen::MatrixXd weight, Eigen::VectorXd bias, ConfigMap params)
        : scaler_(std::move(scaler)), weight_(std::move(weight)), bias_(std::move(bias)), params_(std::move(params)) {}
    static std::unique_ptr<LinearModel> from_blocks(const Blocks& blocks, const ConfigMap& config);

    int classes() const override { return static_cast<int>(weight_.rows()); }
    Eigen::MatrixXd scores(const FeatureMatrix& x) const;
    /// Softmax of the scores.
    Eigen::MatrixXd predict_proba(const FeatureMatrix& x) const override;
    Blocks to_blocks() const override;
    ConfigMap hyperparameters() const override { return params_; }
    const Eigen::MatrixXd& weight() const { return weight_; }

private:
    Standardizer scaler_;
    Eigen::MatrixXd weight_;
    Eigen::VectorXd bias_;
    ConfigMap params_;
};

struct SvmOptions {
    double alpha = 1e-4;  // L2 strength
    double eta0 = 0.01;   // eta_t = eta0 / (1 + eta0 * alpha * t)
    int epochs = 30;
};

/// One-vs-rest hinge loss with L2 penalty, plain SGD over seeded shuffles.
std::unique_ptr<LinearModel> fit_svm_sgd(const FeatureMatrix& x, std::span<const int> y, int classes,
                                         std::uint64_t seed, const SvmOptions& options = {});

struct LogRegOptions {
    std::vector<double> grid{0.01, 0.1, 1.0, 10.0};  // inverse regularization strengths C
    int folds = 5;
    int max_iter = 500;
    double tolerance = 1e-6;
};

/// Multinomial logistic regression minimizing mean cross-entropy + |W|^2 / (2 C n),
/// with C picked by stratified k-fold accuracy (ties to the first grid entry), then refit on all data.
std::unique_ptr<LinearModel> fit_logreg_cv(const FeatureMatrix& x, std::span<const int> y, int classes,
                                           std::uint64_t seed, const LogRegOptions& options = {});

/// Full-batch Nesterov gradient descent for one C on already standardized features.
void fit_multinomial(const FeatureMatrix& z, std::span<const int> y, int classes, double c,
                     const LogRegOptions& options, Eigen::MatrixXd& weight, Eigen::VectorXd& bias);

}  // namespace deltacharger::shallow
