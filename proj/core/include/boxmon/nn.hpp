#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace boxmon {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Class identifier as it appears in datasets (an MNIST digit, a toy label).
using ClassLabel = std::int32_t;

enum class Activation { relu, identity };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
  Matrix weights;  // out_dim x in_dim
  Vector bias;     // out_dim
  Activation activation = Activation::relu;

  [[nodiscard]] std::size_t in_dim() const { return static_cast<std::size_t>(weights.cols()); }
  [[nodiscard]] std::size_t out_dim() const { return static_cast<std::size_t>(weights.rows()); }
};

/// Post-activation output of every layer for one input. The last entry equals
/// `logits` (the final layer is always identity).
struct ForwardTrace {
  std::vector<Vector> per_layer;
  Vector logits;
};

struct LayerGradients {
  Matrix weights;
  Vector bias;
};

/// Cross-entropy loss and its gradients with respect to every parameter.
struct ParameterGradients {
  std::vector<LayerGradients> layers;
  double loss = 0.0;
};

/// Dense feedforward classifier: affine+ReLU hidden layers, identity output
/// layer, softmax applied only inside the loss. Immutable once constructed.
class DenseNetwork {
 public:
  DenseNetwork(std::vector<DenseLayer> layers, std::vector<ClassLabel> class_labels);

  [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }
  [[nodiscard]] const std::vector<ClassLabel>& class_labels() const { return labels_; }
  [[nodiscard]] std::size_t input_dim() const { return layers_.front().in_dim(); }
  [[nodiscard]] std::size_t num_classes() const { return labels_.size(); }
  [[nodiscard]] std::size_t num_layers() const { return layers_.size(); }

  /// Index of `label` in class_labels(); throws UnknownClassError.
  [[nodiscard]] std::size_t class_index(ClassLabel label) const;
  [[nodiscard]] bool knows(ClassLabel label) const;

  [[nodiscard]] ForwardTrace forward(const Vector& x) const;
  [[nodiscard]] Vector logits(const Vector& x) const;

  /// Logits plus the post-activation output of one layer, without storing the
  /// rest of the trace. Hot path for attack objectives.
  [[nodiscard]] Vector logits_and_layer(const Vector& x, std::size_t layer, Vector& layer_out) const;

  [[nodiscard]] ClassLabel predict(const Vector& x) const;
  [[nodiscard]] std::size_t predict_index(const Vector& x) const;

  /// d/dx cross_entropy(softmax(logits(x)), target).
  [[nodiscard]] Vector input_gradient(const Vector& x, ClassLabel target) const;

  [[nodiscard]] ParameterGradients backward(const Vector& x, ClassLabel target) const;

  /// Mutable access for the trainer, which owns a private copy.
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

 private:
  void check_input(const Vector& x) const;

  std::vector<DenseLayer> layers_;
  std::vector<ClassLabel> labels_;
};

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(const Vector& v);

/// Softmax shifted by the max logit.
Vector softmax(const Vector& logits);

double cross_entropy(const Vector& logits, std::size_t target_index);

}  // namespace boxmon
