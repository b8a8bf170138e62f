#include "boxmon/training.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "boxmon/errors.hpp"
#include "boxmon/text_io.hpp"

namespace boxmon {

void TrainConfig::validate() const {
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be > 0");
  for (auto h : hidden_dims)
    if (h == 0) throw ArgumentError("hidden layer width must be >= 1");
}

DenseNetwork init_network(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                          const std::vector<ClassLabel>& class_labels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer> layers;
  std::size_t fan_in = input_dim;
  auto make = [&](std::size_t out, Activation act) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    DenseLayer l;
    l.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = u(rng);
    l.bias = Vector::Zero(static_cast<Eigen::Index>(out));
    l.activation = act;
    layers.push_back(std::move(l));
    fan_in = out;
  };
  for (auto h : hidden_dims) make(h, Activation::relu);
  make(class_labels.size(), Activation::identity);
  return DenseNetwork(std::move(layers), class_labels);
}

double evaluate_accuracy(const DenseNetwork& net, const Dataset& ds) {
  if (ds.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (net.predict(ds.samples[i]) == ds.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

double mean_loss(const DenseNetwork& net, const Dataset& ds) {
  if (ds.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    total += cross_entropy(net.logits(ds.samples[i]), net.class_index(ds.labels[i]));
  return total / static_cast<double>(ds.size());
}

DenseNetwork train(const TrainConfig& cfg, const Dataset& data, std::vector<EpochStats>* log) {
  cfg.validate();
  if (data.empty()) throw ArgumentError("training set is empty");
  const auto labels = data.classes();
  if (labels.size() < 2) throw ArgumentError("training set must contain at least two classes");

  DenseNetwork net = init_network(data.feature_dim, cfg.hidden_dims, labels, cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  if (log) log->push_back({0, mean_loss(net, data), evaluate_accuracy(net, data)});

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<LayerGradients> acc;
      for (std::size_t k = start; k < end; ++k) {
        auto g = net.backward(data.samples[order[k]], data.labels[order[k]]);
        if (acc.empty()) {
          acc = std::move(g.layers);
        } else {
          for (std::size_t l = 0; l < acc.size(); ++l) {
            acc[l].weights += g.layers[l].weights;
            acc[l].bias += g.layers[l].bias;
          }
        }
      }
      const double step = cfg.learning_rate / static_cast<double>(end - start);
      auto& layers = net.mutable_layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].weights -= step * acc[l].weights;
        layers[l].bias -= step * acc[l].bias;
      }
    }
    if (log) log->push_back({epoch, mean_loss(net, data), evaluate_accuracy(net, data)});
  }
  return net;
}

void write_training_log(const std::vector<EpochStats>& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "epoch,loss,accuracy\n";
  for (const auto& e : log)
    out << e.epoch << ',' << text_io::format_double(e.loss) << ','
        << text_io::format_double(e.accuracy) << '\n';
}

}  // namespace boxmon
