#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "deltacharger/network.hpp"

namespace deltacharger::nn {

struct TrainConfig {
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double plateau_factor = 0.5;  // learning-rate multiplier when validation loss stalls
    int plateau_patience = 5;
    double train_fraction = 0.67;
    std::uint64_t seed = 42;

    /// Throws InvalidArgument; the factor must lie in [0.1, 0.5].
    void validate() const;
};

/// Reduce-on-plateau: after `patience` epochs without a strict decrease of
/// the metric, multiply the rate by `factor` and restart the count.
class PlateauScheduler {
public:
    PlateauScheduler(double factor, int patience) : factor_(factor), patience_(patience) {}

    double step(double metric, double lr);
    double best() const { return best_; }

private:
    double factor_;
    int patience_;
    double best_ = std::numeric_limits<double>::infinity();
    int bad_epochs_ = 0;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0;
    double val_loss = 0;
    double val_accuracy = 0;
    double learning_rate = 0;  // rate used during this epoch
};

using TrainHistory = std::vector<EpochRecord>;

/// SGD with momentum (v = mu v + g; w -= lr v) over seeded shuffles.
/// Initializes `net` from the seed, runs exactly config.epochs epochs and
/// skips a trailing batch of one sample. Throws Degenerate when the training
/// labels hold fewer than two classes.
TrainHistory train_network(Network& net, const Matrix& x_train, std::span<const int> y_train, const Matrix& x_val,
                           std::span<const int> y_val, const TrainConfig& config);

/// Argmax over logits in eval mode.
std::vector<int> predict_classes(Network& net, const Matrix& x);
double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace deltacharger::nn
