#include "polsar/cnn.hpp"
#include "polsar/error.hpp"
#include "polsar/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace polsar::cnn {

void TrainConfig::validate() const {
  if (max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be >= 1");
  }
  if (!(initial_lr > 0.0)) {
    throw std::invalid_argument("initial learning rate must be positive");
  }
  if (!(lr_down > 0.0 && lr_down < 1.0 && lr_up > 1.0)) {
    throw std::invalid_argument("learning-rate factors must satisfy 0 < down < 1 < up");
  }
}

double adapt_learning_rate(double lr, double prev_mse, double new_mse, double up, double down) {
  if (!(lr > 0.0)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  return new_mse < prev_mse ? lr * up : lr * down;
}

double mean_loss(const CompactCnn& net, std::span<const Sample> samples) {
  if (samples.empty()) {
    return 0.0;
  }
  ForwardTrace trace;
  double sum = 0.0;
  for (const auto& s : samples) {
    sum += mse_loss(net.forward(s.patch, trace), s.label);
  }
  return sum / static_cast<double>(samples.size());
}

double accuracy(const CompactCnn& net, std::span<const Sample> samples) {
  if (samples.empty()) {
    return 0.0;
  }
  ForwardTrace trace;
  std::size_t hits = 0;
  for (const auto& s : samples) {
    if (argmax(net.forward(s.patch, trace)) == s.label) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

TrainResult train(CompactCnn net, std::span<const Sample> samples, const TrainConfig& cfg,
                  std::span<const Sample> validation) {
  cfg.validate();
  if (samples.empty()) {
    throw std::invalid_argument("cannot train on an empty sample set");
  }
  const int classes = net.config().num_classes;
  for (const auto& s : samples) {
    if (s.label < 0 || s.label >= classes) {
      throw std::invalid_argument("sample label " + std::to_string(s.label) +
                                  " outside [0, " + std::to_string(classes) + ")");
    }
  }

  TrainHistory history;
  history.initial_mse = mean_loss(net, samples);
  if (!std::isfinite(history.initial_mse)) {
    throw DivergenceError(0);
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(cfg.shuffle_seed, 0x53485546 /* "SHUF" */);
  std::vector<double> gradient(net.parameter_count());
  ForwardTrace trace;

  double lr = cfg.initial_lr;
  double prev_mse = history.initial_mse;
  for (int epoch = 1; epoch <= cfg.max_iterations; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    auto params = net.parameters();
    for (std::size_t idx : order) {
      const auto& s = samples[idx];
      (void)net.forward(s.patch, trace);
      (void)backward(net, trace, s.label, gradient);
      for (std::size_t p = 0; p < params.size(); ++p) {
        params[p] -= lr * gradient[p];
      }
    }

    const double mse = mean_loss(net, samples);
    if (!std::isfinite(mse)) {
      throw DivergenceError(epoch);
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_mse = mse;
    record.learning_rate = lr;
    record.next_learning_rate = adapt_learning_rate(lr, prev_mse, mse, cfg.lr_up, cfg.lr_down);
    if (!validation.empty()) {
      record.validation_mse = mean_loss(net, validation);
      record.validation_accuracy = accuracy(net, validation);
    }
    history.epochs.push_back(record);
    history.final_epoch = epoch;
    prev_mse = mse;
    lr = record.next_learning_rate;
  }
  return {std::move(net), std::move(history)};
}

}  // namespace polsar::cnn
