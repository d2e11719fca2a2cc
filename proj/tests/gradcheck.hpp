#pragma once
// Central-difference gradient oracle for single layers, the loss and whole
// networks. Probe loss: L = sum(W .* f(x)) with a fixed random W.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "deltacharger/layers.hpp"
#include "deltacharger/network.hpp"

namespace gradcheck {

using deltacharger::Rng;
using deltacharger::nn::Matrix;

struct TensorError {
    std::string name;
    double rel_error = 0;
};

inline double rel_error(const Matrix& analytic, const Matrix& numeric) {
    // floor: a bias feeding batch norm has an exactly zero gradient
    const double scale = std::max({analytic.norm(), numeric.norm(), 1e-6});
    return (analytic - numeric).norm() / scale;
}

inline Matrix random_matrix(Rng& rng, int rows, int cols, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

// Values bounded away from zero so ReLU kinks stay outside the eps window.
inline Matrix random_away_from_zero(Rng& rng, int rows, int cols) {
    std::uniform_real_distribution<double> mag(0.05, 1.0);
    std::bernoulli_distribution sign(0.5);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sign(rng) ? mag(rng) : -mag(rng);
    return m;
}

inline Matrix numeric_gradient(Matrix& target, const std::function<double()>& loss, double eps) {
    Matrix g(target.rows(), target.cols());
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        const double saved = target.data()[i];
        target.data()[i] = saved + eps;
        const double plus = loss();
        target.data()[i] = saved - eps;
        const double minus = loss();
        target.data()[i] = saved;
        g.data()[i] = (plus - minus) / (2 * eps);
    }
    return g;
}

/// Relative error of d/dx and of every parameter gradient of one layer.
inline std::vector<TensorError> check_layer(deltacharger::nn::Layer& layer, Matrix x, deltacharger::nn::Mode mode,
                                            Rng& rng, double eps = 1e-4) {
    const Matrix probe_out = layer.forward(x, mode);
    const Matrix w = random_matrix(rng, static_cast<int>(probe_out.rows()), static_cast<int>(probe_out.cols()));

    layer.zero_grad();
    layer.forward(x, mode);
    const Matrix dx = layer.backward(w);
    std::vector<Matrix> analytic;
    auto params = layer.parameters();
    for (auto& p : params) analytic.push_back(*p.grad);

    auto loss = [&] { return layer.forward(x, mode).cwiseProduct(w).sum(); };
    std::vector<TensorError> out;
    out.push_back({"input", rel_error(dx, numeric_gradient(x, loss, eps))});
    for (std::size_t i = 0; i < params.size(); ++i)
        out.push_back({params[i].name, rel_error(analytic[i], numeric_gradient(*params[i].value, loss, eps))});
    return out;
}

/// Same check through a full network with softmax cross-entropy on top.
inline std::vector<TensorError> check_network(deltacharger::nn::Network& net, Matrix x, const std::vector<int>& labels,
                                              double eps = 1e-4) {
    using deltacharger::nn::Mode;
    using deltacharger::nn::softmax_cross_entropy;
    net.zero_grad();
    const auto res = softmax_cross_entropy(net.forward(x, Mode::Train), labels);
    const Matrix dx = net.backward(res.grad);
    auto params = net.parameters();
    std::vector<Matrix> analytic;
    for (auto& p : params) analytic.push_back(*p.grad);

    auto loss = [&] { return softmax_cross_entropy(net.forward(x, Mode::Train), labels).loss; };
    std::vector<TensorError> out;
    out.push_back({"input", rel_error(dx, numeric_gradient(x, loss, eps))});
    for (std::size_t i = 0; i < params.size(); ++i)
        out.push_back({params[i].name, rel_error(analytic[i], numeric_gradient(*params[i].value, loss, eps))});
    return out;
}

inline double worst(const std::vector<TensorError>& errors) {
    double w = 0;
    for (const auto& e : errors) w = std::max(w, e.rel_error);
    return w;
}

/// One randomly shaped instance of each layer kind; `kind` in
/// {dense, conv3x3, bn_train, bn_eval, bn_spatial, relu}. Returns the worst error.
inline double check_random_layer(const std::string& kind, Rng& rng) {
    using namespace deltacharger::nn;
    std::uniform_int_distribution<int> small(1, 4), mid(1, 8), batch(2, 6);
    if (kind == "dense") {
        const int in = mid(rng), out = mid(rng), n = batch(rng);
        Dense d(in, out);
        d.initialize(rng);
        d.bias = random_matrix(rng, out, 1);
        return worst(check_layer(d, random_matrix(rng, n, in), Mode::Train, rng));
    }
    if (kind == "conv3x3") {
        const int ci = small(rng), co = small(rng), h = 2 + small(rng), w = 2 + small(rng), n = small(rng);
        Conv3x3 c(ci, co, h, w);
        c.initialize(rng);
        c.bias = random_matrix(rng, co, 1);
        return worst(check_layer(c, random_matrix(rng, n, ci * h * w), Mode::Train, rng));
    }
    if (kind == "bn_train" || kind == "bn_eval") {
        const int f = mid(rng), n = batch(rng);
        BatchNorm b(f);
        b.gamma = random_matrix(rng, f, 1, 0.5, 1.5);
        b.beta = random_matrix(rng, f, 1);
        b.running_mean = random_matrix(rng, f, 1);
        b.running_var = random_matrix(rng, f, 1, 0.5, 2.0);
        const Mode mode = kind == "bn_train" ? Mode::Train : Mode::Eval;
        return worst(check_layer(b, random_matrix(rng, n, f, -2, 2), mode, rng));
    }
    if (kind == "bn_spatial") {
        const int c = small(rng), h = small(rng), w = 1 + small(rng), n = batch(rng);
        BatchNorm b(Shape{c, h, w});
        b.gamma = random_matrix(rng, c, 1, 0.5, 1.5);
        b.beta = random_matrix(rng, c, 1);
        return worst(check_layer(b, random_matrix(rng, n, c * h * w, -2, 2), Mode::Train, rng));
    }
    // relu
    const int c = small(rng), h = small(rng), w = small(rng), n = batch(rng);
    ReLU r(Shape{c, h, w});
    return worst(check_layer(r, random_away_from_zero(rng, n, c * h * w), Mode::Train, rng));
}

/// Softmax cross-entropy d loss / d logits against finite differences.
inline double check_random_loss(Rng& rng) {
    using namespace deltacharger::nn;
    std::uniform_int_distribution<int> classes(2, 7), batch(1, 6);
    const int c = classes(rng), n = batch(rng);
    Matrix logits = random_matrix(rng, n, c, -3, 3);
    std::vector<int> labels(n);
    std::uniform_int_distribution<int> pick(0, c - 1);
    for (int& l : labels) l = pick(rng);
    const Matrix analytic = softmax_cross_entropy(logits, labels).grad;
    auto loss = [&] { return softmax_cross_entropy(logits, labels).loss; };
    return rel_error(analytic, numeric_gradient(logits, loss, 1e-4));
}

inline const std::vector<std::string>& layer_kinds() {
    static const std::vector<std::string> kinds{"dense", "conv3x3", "bn_train", "bn_eval", "bn_spatial", "relu"};
    return kinds;
}

}  // namespace gradcheck
