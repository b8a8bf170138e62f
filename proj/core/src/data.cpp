#include "boxmon/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>

#include "boxmon/errors.hpp"

namespace boxmon {

void Dataset::add(Vector sample, ClassLabel label) {
  if (samples.empty() && feature_dim == 0) feature_dim = static_cast<std::size_t>(sample.size());
  if (static_cast<std::size_t>(sample.size()) != feature_dim)
    throw ShapeError("sample length " + std::to_string(sample.size()) + " != feature_dim " +
                     std::to_string(feature_dim));
  samples.push_back(std::move(sample));
  labels.push_back(label);
}

std::vector<ClassLabel> Dataset::classes() const {
  std::vector<ClassLabel> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Dataset Dataset::filter(const std::set<ClassLabel>& keep) const {
  Dataset out;
  out.feature_dim = feature_dim;
  for (std::size_t i = 0; i < size(); ++i)
    if (keep.contains(labels[i])) out.add(samples[i], labels[i]);
  return out;
}

void Dataset::validate() const {
  if (samples.size() != labels.size()) throw ShapeError("samples/labels length mismatch");
  for (const auto& s : samples) {
    if (static_cast<std::size_t>(s.size()) != feature_dim) throw ShapeError("sample length != feature_dim");
    if (!s.allFinite() || (s.array() < 0.0).any() || (s.array() > 1.0).any())
      throw ArgumentError("sample coordinate outside [0,1]");
  }
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4))
    throw FormatError(path.string() + ": truncated IDX header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::ifstream open_idx(const std::filesystem::path& path, std::uint32_t magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open IDX file");
  const std::uint32_t got = read_be32(in, path);
  if (got != magic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "bad IDX magic 0x%08x (expected 0x%08x)", got, magic);
    throw FormatError(path.string() + ": " + buf);
  }
  return in;
}

}  // namespace

Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path, std::size_t limit) {
  std::ifstream img = open_idx(images_path, 0x00000803);
  std::ifstream lab = open_idx(labels_path, 0x00000801);
  const std::uint32_t n_img = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);
  const std::uint32_t n_lab = read_be32(lab, labels_path);
  if (n_img != n_lab)
    throw FormatError(labels_path.string() + ": label count " + std::to_string(n_lab) +
                      " does not match image count " + std::to_string(n_img) + " in " +
                      images_path.string());
  const std::size_t dim = std::size_t{rows} * cols;
  if (dim == 0) throw FormatError(images_path.string() + ": zero-sized images");
  std::size_t n = n_img;
  if (limit > 0) n = std::min(n, limit);

  std::vector<unsigned char> labels(n);
  if (!lab.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(n)))
    throw FormatError(labels_path.string() + ": truncated label data");

  Dataset ds;
  ds.feature_dim = dim;
  ds.samples.reserve(n);
  ds.labels.reserve(n);
  std::vector<unsigned char> pixels(dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (!img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(dim)))
      throw FormatError(images_path.string() + ": truncated image data at sample " + std::to_string(i));
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) v[static_cast<Eigen::Index>(j)] = pixels[j] / 255.0;
    ds.samples.push_back(std::move(v));
    ds.labels.push_back(labels[i]);
  }
  return ds;
}

ClassSplit split_by_classes(const Dataset& ds, const std::set<ClassLabel>& known,
                            double test_fraction, std::uint64_t seed) {
  if (known.empty()) throw ArgumentError("known class set is empty");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ArgumentError("test_fraction must lie in (0,1)");
  const auto present = ds.classes();
  for (ClassLabel c : known)
    if (!std::binary_search(present.begin(), present.end(), c))
      throw ArgumentError("known class " + std::to_string(c) + " has no samples");

  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::map<ClassLabel, std::vector<std::size_t>> by_class;
  for (std::size_t idx : order) by_class[ds.labels[idx]].push_back(idx);

  ClassSplit split;
  split.known_classes = known;
  split.train_known.feature_dim = split.test_known.feature_dim = split.test_novel.feature_dim =
      ds.feature_dim;
  for (ClassLabel c : present)
    if (!known.contains(c)) split.novel_classes.insert(c);

  // Test membership decided per class; output keeps the shuffled order.
  std::vector<char> to_test(ds.size(), 0);
  for (const auto& [label, idxs] : by_class) {
    if (!known.contains(label)) continue;
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idxs.size())));
    for (std::size_t k = 0; k < n_test; ++k) to_test[idxs[k]] = 1;
  }
  for (std::size_t idx : order) {
    const ClassLabel label = ds.labels[idx];
    if (!known.contains(label))
      split.test_novel.add(ds.samples[idx], label);
    else if (to_test[idx])
      split.test_known.add(ds.samples[idx], label);
    else
      split.train_known.add(ds.samples[idx], label);
  }
  return split;
}

namespace {
double clip01(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace

Dataset synth_xor(std::size_t n, std::uint64_t seed) {
  if (n < 4) throw ArgumentError("synth_xor needs n >= 4");
  static constexpr std::array<std::array<double, 2>, 4> kCorners{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  Dataset ds;
  ds.feature_dim = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = kCorners[i % 4];
    Vector v(2);
    v[0] = clip01(c[0] + noise(rng));
    v[1] = clip01(c[1] + noise(rng));
    const auto label = static_cast<ClassLabel>(static_cast<int>(c[0]) ^ static_cast<int>(c[1]));
    ds.add(std::move(v), label);
  }
  return ds;
}

Dataset synth_playground(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("synth_playground needs n >= 2");
  static constexpr std::array<double, 2> kRadii{0.15, 0.35};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.03);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  Dataset ds;
  ds.feature_dim = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<ClassLabel>(i % 2);
    const double r = kRadii[i % 2] + noise(rng);
    const double a = angle(rng);
    Vector v(2);
    v[0] = clip01(0.5 + r * std::cos(a));
    v[1] = clip01(0.5 + r * std::sin(a));
    ds.add(std::move(v), label);
  }
  return ds;
}

}  // namespace boxmon
