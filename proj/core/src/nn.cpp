#include "boxmon/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "boxmon/errors.hpp"

namespace boxmon {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::identity:
      return "identity";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw FormatError("unknown activation tag '" + s + "'");
}

DenseNetwork::DenseNetwork(std::vector<DenseLayer> layers, std::vector<ClassLabel> class_labels)
    : layers_(std::move(layers)), labels_(std::move(class_labels)) {
  if (layers_.empty()) throw ArgumentError("network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weights.rows() != l.bias.size())
      throw ShapeError("layer " + std::to_string(i) + ": weight rows != bias length");
    if (l.weights.rows() == 0 || l.weights.cols() == 0)
      throw ShapeError("layer " + std::to_string(i) + ": empty weight matrix");
    if (i + 1 < layers_.size() && l.out_dim() != layers_[i + 1].in_dim())
      throw ShapeError("layer " + std::to_string(i) + " out_dim does not chain into layer " +
                       std::to_string(i + 1));
  }
  if (layers_.back().activation != Activation::identity)
    throw ArgumentError("final layer must use identity activation");
  if (labels_.size() != layers_.back().out_dim())
    throw ShapeError("class label count != final layer out_dim");
  auto sorted = labels_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ArgumentError("duplicate class label");
}

std::size_t DenseNetwork::class_index(ClassLabel label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw UnknownClassError("unknown class " + std::to_string(label));
  return static_cast<std::size_t>(it - labels_.begin());
}

bool DenseNetwork::knows(ClassLabel label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

void DenseNetwork::check_input(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim())
    throw ShapeError("input has length " + std::to_string(x.size()) + ", network expects " +
                     std::to_string(input_dim()));
}

namespace {

void apply(Activation a, Vector& v) {
  if (a == Activation::relu) v = v.cwiseMax(0.0);
}

}  // namespace

ForwardTrace DenseNetwork::forward(const Vector& x) const {
  check_input(x);
  ForwardTrace trace;
  trace.per_layer.reserve(layers_.size());
  const Vector* in = &x;
  for (const auto& l : layers_) {
    Vector out = l.weights * *in + l.bias;
    apply(l.activation, out);
    trace.per_layer.push_back(std::move(out));
    in = &trace.per_layer.back();
  }
  trace.logits = trace.per_layer.back();
  return trace;
}

Vector DenseNetwork::logits(const Vector& x) const {
  check_input(x);
  Vector cur = x;
  for (const auto& l : layers_) {
    Vector out = l.weights * cur + l.bias;
    apply(l.activation, out);
    cur.swap(out);
  }
  return cur;
}

Vector DenseNetwork::logits_and_layer(const Vector& x, std::size_t layer, Vector& layer_out) const {
  check_input(x);
  if (layer >= layers_.size()) throw ArgumentError("layer index out of range");
  Vector cur = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    Vector out = l.weights * cur + l.bias;
    apply(l.activation, out);
    cur.swap(out);
    if (i == layer) layer_out = cur;
  }
  return cur;
}

std::size_t DenseNetwork::predict_index(const Vector& x) const { return argmax(logits(x)); }

ClassLabel DenseNetwork::predict(const Vector& x) const { return labels_[predict_index(x)]; }

namespace {

// Backpropagates dL/dlogits through the stored trace. Fills parameter
// gradients when `params` is non-null and returns dL/dx.
Vector backprop(const std::vector<DenseLayer>& layers, const Vector& x, const ForwardTrace& trace,
                Vector delta, ParameterGradients* params) {
  if (params) params->layers.resize(layers.size());
  for (std::size_t i = layers.size(); i-- > 0;) {
    const auto& l = layers[i];
    if (l.activation == Activation::relu) {
      const Vector& out = trace.per_layer[i];
      for (Eigen::Index j = 0; j < delta.size(); ++j)
        if (out[j] <= 0.0) delta[j] = 0.0;
    }
    const Vector& in = i == 0 ? x : trace.per_layer[i - 1];
    if (params) {
      params->layers[i].weights = delta * in.transpose();
      params->layers[i].bias = delta;
    }
    delta = l.weights.transpose() * delta;
  }
  return delta;
}

}  // namespace

Vector DenseNetwork::input_gradient(const Vector& x, ClassLabel target) const {
  const std::size_t t = class_index(target);
  ForwardTrace trace = forward(x);
  Vector delta = softmax(trace.logits);
  delta[static_cast<Eigen::Index>(t)] -= 1.0;
  return backprop(layers_, x, trace, std::move(delta), nullptr);
}

ParameterGradients DenseNetwork::backward(const Vector& x, ClassLabel target) const {
  const std::size_t t = class_index(target);
  ForwardTrace trace = forward(x);
  ParameterGradients g;
  g.loss = cross_entropy(trace.logits, t);
  Vector delta = softmax(trace.logits);
  delta[static_cast<Eigen::Index>(t)] -= 1.0;
  backprop(layers_, x, trace, std::move(delta), &g);
  return g;
}

std::size_t argmax(const Vector& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  return best;
}

Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

double cross_entropy(const Vector& logits, std::size_t target_index) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits[static_cast<Eigen::Index>(target_index)];
}

}  // namespace boxmon
