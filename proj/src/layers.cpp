#include "deltacharger/layers.hpp"

#include <cmath>
#include <random>

#include "deltacharger/error.hpp"

namespace deltacharger::nn {

namespace {

void check_input(const Matrix& x, const Shape& shape, const char* layer) {
    if (x.cols() != shape.size())
        throw Error(ErrorKind::ShapeMismatch, std::string(layer) + " expects " + std::to_string(shape.size()) +
                                                   " features, got " + std::to_string(x.cols()));
}

// Kaiming-uniform for ReLU networks: U(-sqrt(6 / fan_in), sqrt(6 / fan_in)).
void kaiming_uniform(Matrix& w, int fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
}

}  // namespace

void Layer::zero_grad() {
    for (auto& p : parameters())
        if (p.grad) p.grad->setZero();
}

// --- Dense ------------------------------------------------------------------

Dense::Dense(int in, int out)
    : weight(Matrix::Zero(out, in)),
      bias(Matrix::Zero(out, 1)),
      weight_grad(Matrix::Zero(out, in)),
      bias_grad(Matrix::Zero(out, 1)),
      in_(in),
      out_(out) {
    if (in <= 0 || out <= 0) throw Error(ErrorKind::ShapeMismatch, "dense dimensions must be positive");
}

Matrix Dense::forward(const Matrix& x, Mode) {
    check_input(x, input_shape(), "dense");
    input_ = x;
    Matrix y = x * weight.transpose();
    y.rowwise() += bias.col(0).transpose();
    return y;
}

Matrix Dense::backward(const Matrix& dy) {
    weight_grad.noalias() += dy.transpose() * input_;
    bias_grad.col(0) += dy.colwise().sum().transpose();
    return dy * weight;
}

std::vector<Parameter> Dense::parameters() {
    return {{"weight", &weight, &weight_grad}, {"bias", &bias, &bias_grad}};
}

void Dense::initialize(Rng& rng) {
    kaiming_uniform(weight, in_, rng);
    bias.setZero();
}

std::string Dense::describe() const { return "dense(" + std::to_string(in_) + "," + std::to_string(out_) + ")"; }

// --- Conv3x3 ----------------------------------------------------------------

Conv3x3::Conv3x3(int in_channels, int out_channels, int height, int width)
    : in_ch_(in_channels), out_ch_(out_channels), h_(height), w_(width) {
    if (in_channels <= 0 || out_channels <= 0) throw Error(ErrorKind::ShapeMismatch, "conv channels must be positive");
    if (height < 3 || width < 3) throw Error(ErrorKind::ShapeMismatch, "conv3x3 input smaller than kernel");
    weight = Matrix::Zero(out_ch_, in_ch_ * 9);
    weight_grad = Matrix::Zero(out_ch_, in_ch_ * 9);
    bias = Matrix::Zero(out_ch_, 1);
    bias_grad = Matrix::Zero(out_ch_, 1);
}

Eigen::MatrixXd Conv3x3::im2col(const double* sample) const {
    const int oh = h_ - 2, ow = w_ - 2;
    Eigen::MatrixXd cols(in_ch_ * 9, oh * ow);
    for (int c = 0; c < in_ch_; ++c) {
        const double* plane = sample + c * h_ * w_;
        for (int ki = 0; ki < 3; ++ki)
            for (int kj = 0; kj < 3; ++kj) {
                const int row = c * 9 + ki * 3 + kj;
                for (int i = 0; i < oh; ++i)
                    for (int j = 0; j < ow; ++j) cols(row, i * ow + j) = plane[(i + ki) * w_ + (j + kj)];
            }
    }
    return cols;
}

void Conv3x3::col2im(const Eigen::MatrixXd& cols, double* sample) const {
    const int oh = h_ - 2, ow = w_ - 2;
    for (int c = 0; c < in_ch_; ++c) {
        double* plane = sample + c * h_ * w_;
        for (int ki = 0; ki < 3; ++ki)
            for (int kj = 0; kj < 3; ++kj) {
                const int row = c * 9 + ki * 3 + kj;
                for (int i = 0; i < oh; ++i)
                    for (int j = 0; j < ow; ++j) plane[(i + ki) * w_ + (j + kj)] += cols(row, i * ow + j);
            }
    }
}

Matrix Conv3x3::forward(const Matrix& x, Mode) {
    check_input(x, input_shape(), "conv3x3");
    input_ = x;
    const int positions = (h_ - 2) * (w_ - 2);
    Matrix y(x.rows(), out_ch_ * positions);
    for (Eigen::Index n = 0; n < x.rows(); ++n) {
        const Eigen::MatrixXd cols = im2col(x.row(n).data());
        Eigen::Map<Matrix> out(y.row(n).data(), out_ch_, positions);
        out.noalias() = weight * cols;
        out.colwise() += bias.col(0);
    }
    return y;
}

Matrix Conv3x3::backward(const Matrix& dy) {
    const int positions = (h_ - 2) * (w_ - 2);
    Matrix dx = Matrix::Zero(input_.rows(), input_.cols());
    for (Eigen::Index n = 0; n < dy.rows(); ++n) {
        const Eigen::Map<const Matrix> g(dy.row(n).data(), out_ch_, positions);
        const Eigen::MatrixXd cols = im2col(input_.row(n).data());
        weight_grad.noalias() += g * cols.transpose();
        bias_grad.col(0) += g.rowwise().sum();
        const Eigen::MatrixXd dcols = weight.transpose() * g;
        col2im(dcols, dx.row(n).data());
    }
    return dx;
}

std::vector<Parameter> Conv3x3::parameters() {
    return {{"weight", &weight, &weight_grad}, {"bias", &bias, &bias_grad}};
}

void Conv3x3::initialize(Rng& rng) {
    kaiming_uniform(weight, in_ch_ * 9, rng);
    bias.setZero();
}

std::string Conv3x3::describe() const {
    return "conv3x3(" + std::to_string(in_ch_) + "," + std::to_string(out_ch_) + ")";
}

// --- BatchNorm --------------------------------------------------------------

BatchNorm::BatchNorm(Shape shape)
    : gamma(Matrix::Ones(shape.channels, 1)),
      beta(Matrix::Zero(shape.channels, 1)),
      running_mean(Matrix::Zero(shape.channels, 1)),
      running_var(Matrix::Ones(shape.channels, 1)),
      gamma_grad(Matrix::Zero(shape.channels, 1)),
      beta_grad(Matrix::Zero(shape.channels, 1)),
      channels_(shape.channels),
      spatial_(shape.height * shape.width),
      shape_(shape) {
    if (shape.channels <= 0) throw Error(ErrorKind::ShapeMismatch, "batchnorm needs at least one channel");
}

Matrix BatchNorm::forward(const Matrix& x, Mode mode) {
    check_input(x, shape_, "batchnorm");
    mode_ = mode;
    const Eigen::Index n = x.rows();
    const double m = static_cast<double>(n * spatial_);
    if (mode == Mode::Train && m < 2)
        throw Error(ErrorKind::ShapeMismatch, "batchnorm in train mode needs more than one value per channel");

    xhat_.resize(n, x.cols());
    inv_std_.resize(channels_);
    Matrix y(n, x.cols());
    for (int c = 0; c < channels_; ++c) {
        const auto block = x.middleCols(c * spatial_, spatial_);
        double mean, var;
        if (mode == Mode::Train) {
            mean = block.mean();
            var = (block.array() - mean).square().sum() / m;
            running_mean(c, 0) = (1 - momentum) * running_mean(c, 0) + momentum * mean;
            running_var(c, 0) = (1 - momentum) * running_var(c, 0) + momentum * var * m / (m - 1);
        } else {
            mean = running_mean(c, 0);
            var = running_var(c, 0);
        }
        inv_std_[c] = 1.0 / std::sqrt(var + eps);
        xhat_.middleCols(c * spatial_, spatial_) = (block.array() - mean) * inv_std_[c];
        y.middleCols(c * spatial_, spatial_) =
            (xhat_.middleCols(c * spatial_, spatial_).array() * gamma(c, 0) + beta(c, 0)).matrix();
    }
    return y;
}

Matrix BatchNorm::backward(const Matrix& dy) {
    const double m = static_cast<double>(dy.rows() * spatial_);
    Matrix dx(dy.rows(), dy.cols());
    for (int c = 0; c < channels_; ++c) {
        const auto g = dy.middleCols(c * spatial_, spatial_).array();
        const auto xh = xhat_.middleCols(c * spatial_, spatial_).array();
        gamma_grad(c, 0) += (g * xh).sum();
        beta_grad(c, 0) += g.sum();
        const auto dxhat = g * gamma(c, 0);
        if (mode_ == Mode::Train) {
            const double sum_d = dxhat.sum();
            const double sum_dx = (dxhat * xh).sum();
            dx.middleCols(c * spatial_, spatial_) =
                ((m * dxhat - sum_d - xh * sum_dx) * (inv_std_[c] / m)).matrix();
        } else {
            dx.middleCols(c * spatial_, spatial_) = (dxhat * inv_std_[c]).matrix();
        }
    }
    return dx;
}

std::vector<Parameter> BatchNorm::parameters() {
    return {{"gamma", &gamma, &gamma_grad}, {"beta", &beta, &beta_grad}};
}

std::vector<Parameter> BatchNorm::buffers() {
    return {{"running_mean", &running_mean, nullptr}, {"running_var", &running_var, nullptr}};
}

std::string BatchNorm::describe() const { return "bn(" + std::to_string(channels_) + ")"; }

// --- ReLU -------------------------------------------------------------------

Matrix ReLU::forward(const Matrix& x, Mode) {
    check_input(x, shape_, "relu");
    mask_ = (x.array() > 0).cast<double>().matrix();
    return x.cwiseMax(0.0);
}

Matrix ReLU::backward(const Matrix& dy) { return dy.cwiseProduct(mask_); }

// --- loss -------------------------------------------------------------------

Matrix softmax(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double mx = logits.row(i).maxCoeff();
        const auto e = (logits.row(i).array() - mx).exp();
        out.row(i) = e / e.sum();
    }
    return out;
}

LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
    if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
        throw Error(ErrorKind::ShapeMismatch, "label count differs from batch size");
    const Eigen::Index n = logits.rows();
    LossResult result;
    result.grad = softmax(logits);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || y >= logits.cols()) throw Error(ErrorKind::ShapeMismatch, "label outside class range");
        const double mx = logits.row(i).maxCoeff();
        const double log_sum = mx + std::log((logits.row(i).array() - mx).exp().sum());
        result.loss += log_sum - logits(i, y);
        result.grad(i, y) -= 1.0;
    }
    result.loss /= static_cast<double>(n);
    result.grad /= static_cast<double>(n);
    return result;
}

}  // namespace deltacharger::nn
