#pragma once

// Sequential network built from a spec string such as
//   "in(2,10,10) conv3x3(2,16) bn(16) relu flatten dense(1152,128) ..."
// Tokens are whitespace separated; the first one declares the input shape.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "deltacharger/layers.hpp"

namespace deltacharger::nn {

std::string regular_nn_spec(int classes);
std::string cnn_spec(int classes);

class Network {
public:
    Network() = default;
    /// Throws ShapeMismatch when adjacent layers do not compose, InvalidArgument on bad tokens.
    explicit Network(const std::string& spec);

    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    const std::string& spec() const { return spec_; }
    Shape input_shape() const { return input_; }
    int output_width() const;
    std::size_t size() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_.at(i); }

    void initialize(Rng& rng);
    Matrix forward(const Matrix& x, Mode mode);
    /// Backpropagates d loss / d logits; returns d loss / d input.
    Matrix backward(const Matrix& dlogits);
    void zero_grad();

    /// Named as "l<index>.<name>", e.g. "l0.weight".
    std::vector<Parameter> parameters();
    std::vector<Parameter> buffers();
    std::size_t parameter_count();

private:
    std::string spec_;
    Shape input_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace deltacharger::nn
