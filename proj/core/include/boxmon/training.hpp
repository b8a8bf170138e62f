#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "boxmon/data.hpp"
#include "boxmon/nn.hpp"

namespace boxmon {

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
  std::vector<std::size_t> hidden_dims{40};

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 0 = before the first update
  double loss = 0.0;      // mean cross-entropy over the training set
  double accuracy = 0.0;
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] drawn from `seed`,
/// biases zero, identity output layer sized to `class_labels`.
DenseNetwork init_network(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                          const std::vector<ClassLabel>& class_labels, std::uint64_t seed);

/// Minibatch SGD (no momentum) on mean cross-entropy. Class labels of the
/// result are the sorted distinct labels of `data`. When `log` is given it
/// receives one entry per epoch plus the epoch-0 baseline.
DenseNetwork train(const TrainConfig& cfg, const Dataset& data, std::vector<EpochStats>* log = nullptr);

/// Fraction of samples whose prediction equals the label.
double evaluate_accuracy(const DenseNetwork& net, const Dataset& ds);

double mean_loss(const DenseNetwork& net, const Dataset& ds);

/// Writes `epoch,loss,accuracy` rows.
void write_training_log(const std::vector<EpochStats>& log, const std::filesystem::path& path);

}  // namespace boxmon
