#include "boxmon/model_io.hpp"

#include <fstream>

#include "boxmon/errors.hpp"
#include "boxmon/text_io.hpp"

namespace boxmon {

namespace {
constexpr int kModelVersion = 1;
constexpr long long kMaxDim = 1 << 20;
}  // namespace

void save_model(const DenseNetwork& net, std::ostream& out) {
  using text_io::write_double;
  out << "boxmon-model " << kModelVersion << '\n';
  out << "labels " << net.num_classes();
  for (ClassLabel l : net.class_labels()) out << ' ' << l;
  out << '\n';
  out << "layers " << net.num_layers() << '\n';
  for (const auto& l : net.layers()) {
    out << "layer " << l.in_dim() << ' ' << l.out_dim() << ' ' << to_string(l.activation) << '\n';
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
        if (c) out << ' ';
        write_double(out, l.weights(r, c));
      }
      out << '\n';
    }
    out << "bias";
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      out << ' ';
      write_double(out, l.bias[r]);
    }
    out << '\n';
  }
}

void save_model(const DenseNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_model(net, out);
  if (!out) throw Error("write failed: " + path.string());
}

DenseNetwork load_model(std::istream& in, const std::string& source_name) {
  text_io::TokenReader rd(in, source_name);
  rd.expect("boxmon-model");
  if (rd.integer() != kModelVersion) rd.fail("unsupported model version");
  rd.expect("labels");
  const auto n_labels = rd.count(kMaxDim);
  std::vector<ClassLabel> labels;
  for (long long i = 0; i < n_labels; ++i) labels.push_back(static_cast<ClassLabel>(rd.integer()));
  rd.expect("layers");
  const auto n_layers = rd.count(1024);
  std::vector<DenseLayer> layers;
  for (long long li = 0; li < n_layers; ++li) {
    rd.expect("layer");
    const auto in_dim = rd.count(kMaxDim);
    const auto out_dim = rd.count(kMaxDim);
    DenseLayer layer;
    try {
      layer.activation = activation_from_string(rd.word());
    } catch (const FormatError& e) {
      rd.fail(e.what());
    }
    layer.weights.resize(out_dim, in_dim);
    for (long long r = 0; r < out_dim; ++r)
      for (long long c = 0; c < in_dim; ++c) layer.weights(r, c) = rd.real();
    rd.expect("bias");
    layer.bias.resize(out_dim);
    for (long long r = 0; r < out_dim; ++r) layer.bias[r] = rd.real();
    layers.push_back(std::move(layer));
  }
  try {
    return DenseNetwork(std::move(layers), std::move(labels));
  } catch (const Error& e) {
    rd.fail(e.what());
  }
}

DenseNetwork load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path.string());
  return load_model(in, path.string());
}

}  // namespace boxmon
