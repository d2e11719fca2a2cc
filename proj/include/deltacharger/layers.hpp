#pragma once

// Layers with explicit backward passes. Activations are row-major
// (batch x features); image features are laid out channel, row, column.
// Each layer caches what its backward pass needs during forward().

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deltacharger/rng.hpp"

namespace deltacharger::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Mode { Train, Eval };

struct Shape {
    int channels = 0;
    int height = 1;
    int width = 1;

    int size() const { return channels * height * width; }
    bool flat() const { return height == 1 && width == 1; }
    bool operator==(const Shape&) const = default;
};

/// Non-owning view of a parameter tensor and its gradient accumulator.
/// Buffers (running statistics) have no gradient.
struct Parameter {
    std::string name;
    Matrix* value = nullptr;
    Matrix* grad = nullptr;
};

class Layer {
public:
    virtual ~Layer() = default;

    virtual Matrix forward(const Matrix& x, Mode mode) = 0;
    /// Gradient w.r.t. the input; accumulates parameter gradients.
    virtual Matrix backward(const Matrix& dy) = 0;

    virtual std::vector<Parameter> parameters() { return {}; }
    virtual std::vector<Parameter> buffers() { return {}; }
    virtual void initialize(Rng&) {}

    virtual Shape input_shape() const = 0;
    virtual Shape output_shape() const = 0;
    /// Token used in network spec strings, e.g. "dense(200,128)".
    virtual std::string describe() const = 0;
    virtual std::unique_ptr<Layer> clone() const = 0;

    void zero_grad();
};

class Dense final : public Layer {
public:
    Dense(int in, int out);

    Matrix forward(const Matrix& x, Mode mode) override;
    Matrix backward(const Matrix& dy) override;
    std::vector<Parameter> parameters() override;
    void initialize(Rng& rng) override;
    Shape input_shape() const override { return {in_, 1, 1}; }
    Shape output_shape() const override { return {out_, 1, 1}; }
    std::string describe() const override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

    Matrix weight, bias;  // out x in, out x 1
    Matrix weight_grad, bias_grad;

private:
    int in_, out_;
    Matrix input_;
};

/// 3x3 valid cross-correlation, stride 1, no kernel flip.
class Conv3x3 final : public Layer {
public:
    Conv3x3(int in_channels, int out_channels, int height, int width);

    Matrix forward(const Matrix& x, Mode mode) override;
    Matrix backward(const Matrix& dy) override;
    std::vector<Parameter> parameters() override;
    void initialize(Rng& rng) override;
    Shape input_shape() const override { return {in_ch_, h_, w_}; }
    Shape output_shape() const override { return {out_ch_, h_ - 2, w_ - 2}; }
    std::string describe() const override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv3x3>(*this); }

    Matrix weight, bias;  // out_ch x (in_ch * 9), row index c*9 + ki*3 + kj
    Matrix weight_grad, bias_grad;

private:
    Eigen::MatrixXd im2col(const double* sample) const;
    void col2im(const Eigen::MatrixXd& cols, double* sample) const;

    int in_ch_, out_ch_, h_, w_;
    Matrix input_;
};

/// Per-channel batch normalization; `spatial` positions share statistics.
class BatchNorm final : public Layer {
public:
    explicit BatchNorm(Shape shape);
    explicit BatchNorm(int features) : BatchNorm(Shape{features, 1, 1}) {}

    Matrix forward(const Matrix& x, Mode mode) override;
    Matrix backward(const Matrix& dy) override;
    std::vector<Parameter> parameters() override;
    std::vector<Parameter> buffers() override;
    Shape input_shape() const override { return shape_; }
    Shape output_shape() const override { return shape_; }
    std::string describe() const override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }

    Matrix gamma, beta, running_mean, running_var;  // channels x 1
    Matrix gamma_grad, beta_grad;
    double momentum = 0.1;
    double eps = 1e-5;

private:
    int channels_, spatial_;
    Shape shape_;
    Mode mode_ = Mode::Train;
    Matrix xhat_;
    Eigen::VectorXd inv_std_;
};

class ReLU final : public Layer {
public:
    explicit ReLU(Shape shape) : shape_(shape) {}

    Matrix forward(const Matrix& x, Mode mode) override;
    Matrix backward(const Matrix& dy) override;
    Shape input_shape() const override { return shape_; }
    Shape output_shape() const override { return shape_; }
    std::string describe() const override { return "relu"; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ReLU>(*this); }

private:
    Shape shape_;
    Matrix mask_;
};

/// Shape bookkeeping only; the row layout is already flat.
class Flatten final : public Layer {
public:
    explicit Flatten(Shape shape) : shape_(shape) {}

    Matrix forward(const Matrix& x, Mode) override { return x; }
    Matrix backward(const Matrix& dy) override { return dy; }
    Shape input_shape() const override { return shape_; }
    Shape output_shape() const override { return {shape_.size(), 1, 1}; }
    std::string describe() const override { return "flatten"; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }

private:
    Shape shape_;
};

/// Row-wise softmax.
Matrix softmax(const Matrix& logits);

struct LossResult {
    double loss = 0;  // mean negative log-likelihood
    Matrix grad;      // d loss / d logits
};

/// Log-softmax followed by negative log-likelihood, averaged over the batch.
LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

}  // namespace deltacharger::nn
