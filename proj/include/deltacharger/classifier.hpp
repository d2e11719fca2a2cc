#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace deltacharger {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Named parameter arrays in a fixed order; the unit of model serialization.
using Blocks = std::vector<std::pair<std::string, Eigen::MatrixXd>>;
using ConfigMap = std::map<std::string, std::string>;

const Eigen::MatrixXd& find_block(const Blocks& blocks, const std::string& name);

/// A fitted model. Prediction is read-only and safe to call concurrently.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual int classes() const = 0;
    /// n x classes, rows sum to 1.
    virtual Eigen::MatrixXd predict_proba(const FeatureMatrix& x) const = 0;
    /// Argmax of predict_proba; ties go to the lowest class index.
    virtual std::vector<int> predict(const FeatureMatrix& x) const;

    virtual Blocks to_blocks() const = 0;
    /// Hyperparameters needed to rebuild the model from its blocks.
    virtual ConfigMap hyperparameters() const { return {}; }
};

std::vector<int> argmax_rows(const Eigen::MatrixXd& scores);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Throws MalformedFile naming `what` when `text` is not a complete number.
double parse_double(std::string_view text, std::string_view what);
int parse_int(std::string_view text, std::string_view what);

}  // namespace deltacharger
