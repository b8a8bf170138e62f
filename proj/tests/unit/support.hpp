#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "boxmon/data.hpp"
#include "boxmon/monitor.hpp"
#include "boxmon/nn.hpp"

namespace testing {

using boxmon::DenseLayer;
using boxmon::DenseNetwork;
using boxmon::Matrix;
using boxmon::Vector;

inline std::filesystem::path golden(const std::string& name) {
  return std::filesystem::path(BOXMON_TEST_GOLDEN_DIR) / name;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("boxmon_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Matrix uniform_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double a = 1.0) {
  std::uniform_real_distribution<double> u(-a, a);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

inline Vector uniform_vector(Eigen::Index n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

/// Network with weights and biases uniform in [-1, 1]; relu hidden layers.
inline DenseNetwork random_net(const std::vector<Eigen::Index>& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    layers.push_back({uniform_matrix(dims[i + 1], dims[i], rng), uniform_vector(dims[i + 1], rng),
                      last ? boxmon::Activation::identity : boxmon::Activation::relu});
  }
  std::vector<boxmon::ClassLabel> labels;
  for (Eigen::Index c = 0; c < dims.back(); ++c) labels.push_back(static_cast<boxmon::ClassLabel>(c));
  return DenseNetwork(std::move(layers), std::move(labels));
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)}); }

/// Passes a 2-D input straight through a relu layer (watched, layer 0) and
/// labels it by comparing the two coordinates: class 0 if x0 >= x1.
inline DenseNetwork passthrough_net() {
  DenseLayer hidden{Matrix::Identity(2, 2), Vector::Zero(2), boxmon::Activation::relu};
  Matrix w(2, 2);
  w << 1, -1, -1, 1;
  DenseLayer out{w, Vector::Zero(2), boxmon::Activation::identity};
  return DenseNetwork({hidden, out}, {0, 1});
}

}  // namespace testing
