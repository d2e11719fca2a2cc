#include "deltacharger/train.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "deltacharger/error.hpp"
#include "deltacharger/rng.hpp"

namespace deltacharger::nn {

void TrainConfig::validate() const {
    if (epochs <= 0 || batch_size < 2) throw Error(ErrorKind::InvalidArgument, "epochs > 0 and batch size >= 2 required");
    if (!(learning_rate > 0) || momentum < 0 || momentum >= 1)
        throw Error(ErrorKind::InvalidArgument, "learning rate must be positive and momentum in [0, 1)");
    if (plateau_factor < 0.1 || plateau_factor > 0.5)
        throw Error(ErrorKind::InvalidArgument, "plateau factor must lie in [0.1, 0.5]");
    if (plateau_patience < 0) throw Error(ErrorKind::InvalidArgument, "negative patience");
    if (!(train_fraction > 0 && train_fraction < 1))
        throw Error(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
}

double PlateauScheduler::step(double metric, double lr) {
    if (metric < best_) {
        best_ = metric;
        bad_epochs_ = 0;
        return lr;
    }
    if (++bad_epochs_ > patience_) {
        bad_epochs_ = 0;
        return lr * factor_;
    }
    return lr;
}

std::vector<int> predict_classes(Network& net, const Matrix& x) {
    const Matrix logits = net.forward(x, Mode::Eval);
    std::vector<int> out(logits.rows());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) logits.row(i).maxCoeff(&out[i]);
    return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw Error(ErrorKind::ShapeMismatch, "prediction count differs");
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / truth.size();
}

TrainHistory train_network(Network& net, const Matrix& x_train, std::span<const int> y_train, const Matrix& x_val,
                           std::span<const int> y_val, const TrainConfig& config) {
    config.validate();
    if (x_train.rows() != static_cast<Eigen::Index>(y_train.size()) ||
        x_val.rows() != static_cast<Eigen::Index>(y_val.size()))
        throw Error(ErrorKind::ShapeMismatch, "feature and label counts differ");
    if (std::set<int>(y_train.begin(), y_train.end()).size() < 2)
        throw Error(ErrorKind::Degenerate, "training set holds fewer than two classes");
    if (y_val.empty()) throw Error(ErrorKind::Degenerate, "validation set is empty");

    Rng init_rng(derive_seed(config.seed, 1));
    net.initialize(init_rng);
    Rng shuffle_rng(derive_seed(config.seed, 2));

    auto params = net.parameters();
    std::vector<Matrix> velocity;
    for (const auto& p : params) velocity.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));

    PlateauScheduler scheduler(config.plateau_factor, config.plateau_patience);
    double lr = config.learning_rate;
    std::vector<std::size_t> order(y_train.size());
    std::iota(order.begin(), order.end(), 0);

    TrainHistory history;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            if (end - start < 2) continue;
            Matrix xb(end - start, x_train.cols());
            std::vector<int> yb(end - start);
            for (std::size_t i = start; i < end; ++i) {
                xb.row(i - start) = x_train.row(order[i]);
                yb[i - start] = y_train[order[i]];
            }
            net.zero_grad();
            const LossResult loss = softmax_cross_entropy(net.forward(xb, Mode::Train), yb);
            net.backward(loss.grad);
            for (std::size_t k = 0; k < params.size(); ++k) {
                velocity[k] = config.momentum * velocity[k] + *params[k].grad;
                *params[k].value -= lr * velocity[k];
            }
            loss_sum += loss.loss * (end - start);
            seen += end - start;
        }

        const Matrix logits = net.forward(x_val, Mode::Eval);
        const LossResult val = softmax_cross_entropy(logits, y_val);
        std::vector<int> pred(logits.rows());
        for (Eigen::Index i = 0; i < logits.rows(); ++i) logits.row(i).maxCoeff(&pred[i]);

        history.push_back({epoch + 1, seen ? loss_sum / seen : 0.0, val.loss, accuracy(pred, y_val), lr});
        lr = scheduler.step(val.loss, lr);
    }
    return history;
}

}  // namespace deltacharger::nn
