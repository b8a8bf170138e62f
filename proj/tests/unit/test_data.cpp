#include <algorithm>
#include <map>

#include "boxmon/data.hpp"
#include "boxmon/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace boxmon;
using namespace testing;
namespace fs = std::filesystem;

namespace {

void put_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

// n images of rows x cols; pixel (i, p) = (i * 31 + p) % 256.
void write_images(const fs::path& p, std::uint32_t magic, std::uint32_t n, std::uint32_t rows, std::uint32_t cols,
                  std::size_t drop_bytes = 0) {
  std::ofstream out(p, std::ios::binary);
  put_be32(out, magic);
  put_be32(out, n);
  put_be32(out, rows);
  put_be32(out, cols);
  std::string px;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t k = 0; k < rows * cols; ++k) px.push_back(static_cast<char>((i * 31 + k) % 256));
  px.resize(px.size() - drop_bytes);
  out << px;
}

void write_labels(const fs::path& p, std::uint32_t magic, const std::vector<unsigned char>& labels) {
  std::ofstream out(p, std::ios::binary);
  put_be32(out, magic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

// Independent header dump: big-endian u32 at byte offset `at`.
std::uint32_t header_word(const fs::path& p, std::size_t at) {
  std::ifstream in(p, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(at));
  unsigned char b[4] = {};
  in.read(reinterpret_cast<char*>(b), 4);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
}

std::multiset<std::pair<std::vector<double>, ClassLabel>> as_multiset(const Dataset& ds) {
  std::multiset<std::pair<std::vector<double>, ClassLabel>> s;
  for (std::size_t i = 0; i < ds.size(); ++i)
    s.insert({std::vector<double>(ds.samples[i].data(), ds.samples[i].data() + ds.samples[i].size()), ds.labels[i]});
  return s;
}

Dataset labelled(std::size_t n, int classes) {
  Dataset ds;
  ds.feature_dim = 2;
  for (std::size_t i = 0; i < n; ++i)
    ds.add(vec({double(i) / double(n), double(i % 7) / 7.0}), static_cast<ClassLabel>(i % std::size_t(classes)));
  return ds;
}

}  // namespace

TEST_CASE("IDX loading: shapes, scaling and header errors") {
  const auto dir = scratch_dir("idx");
  write_images(dir / "img", 0x803, 3, 28, 28);
  write_labels(dir / "lab", 0x801, {5, 0, 9});
  const Dataset ds = load_mnist_idx(dir / "img", dir / "lab");
  CHECK(ds.size() == 3);
  CHECK(ds.feature_dim == 784);
  CHECK(ds.labels == std::vector<ClassLabel>{5, 0, 9});
  // pixel 255 shows up at image 0, position 255.
  CHECK(ds.samples[0][255] == 1.0);
  CHECK(ds.samples[0][0] == 0.0);
  CHECK(ds.samples[1][1] == doctest::Approx(32.0 / 255.0).epsilon(1e-15));
  CHECK(load_mnist_idx(dir / "img", dir / "lab", 2).size() == 2);

  write_labels(dir / "lab_bad_magic", 0x803, {5, 0, 9});
  try {
    (void)load_mnist_idx(dir / "img", dir / "lab_bad_magic");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("lab_bad_magic") != std::string::npos);
  }

  write_images(dir / "img_short", 0x803, 3, 28, 28, 10);
  try {
    (void)load_mnist_idx(dir / "img_short", dir / "lab");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("img_short") != std::string::npos);
  }

  write_labels(dir / "lab_two", 0x801, {1, 2});
  CHECK_THROWS_AS(load_mnist_idx(dir / "img", dir / "lab_two"), FormatError);
  CHECK_THROWS_AS(load_mnist_idx(dir / "missing", dir / "lab"), FormatError);
}

TEST_CASE("standard MNIST training files" * doctest::skip(!fs::exists(fs::path(BOXMON_TEST_MNIST_DIR) / "train-labels-idx1-ubyte"))) {
  const fs::path dir = BOXMON_TEST_MNIST_DIR;
  const fs::path images = dir / "train-images-idx3-ubyte", labels = dir / "train-labels-idx1-ubyte";
  REQUIRE(header_word(images, 0) == 0x803);
  REQUIRE(header_word(labels, 0) == 0x801);
  const std::uint32_t n = header_word(images, 4);
  const Dataset ds = load_mnist_idx(images, labels);
  CHECK(ds.size() == n);
  CHECK(ds.size() == 60000);
  CHECK(ds.feature_dim == header_word(images, 8) * header_word(images, 12));
  CHECK(ds.feature_dim == 784);
  ds.validate();

  const ClassSplit s = split_by_classes(ds, {0, 1}, 1.0 / 6.0, 3);
  CHECK(s.test_novel.classes() == std::vector<ClassLabel>{2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(s.train_known.classes() == std::vector<ClassLabel>{0, 1});
}

TEST_CASE("split_by_classes") {
  const Dataset ds = labelled(600, 4);
  const ClassSplit s = split_by_classes(ds, {0, 1}, 1.0 / 6.0, 11);
  CHECK(s.known_classes == std::set<ClassLabel>{0, 1});
  CHECK(s.novel_classes == std::set<ClassLabel>{2, 3});
  CHECK(s.test_novel.classes() == std::vector<ClassLabel>{2, 3});
  CHECK(s.train_known.classes() == std::vector<ClassLabel>{0, 1});
  CHECK(s.test_known.size() == 50);  // 150 per class, one sixth each
  CHECK(s.train_known.size() == 250);

  // Union of the parts is the input.
  auto parts = as_multiset(s.train_known);
  for (const auto* d : {&s.test_known, &s.test_novel})
    for (auto& e : as_multiset(*d)) parts.insert(e);
  CHECK(parts == as_multiset(ds));

  const ClassSplit again = split_by_classes(ds, {0, 1}, 1.0 / 6.0, 11);
  CHECK(as_multiset(again.train_known) == as_multiset(s.train_known));
  CHECK(again.train_known.labels == s.train_known.labels);
  CHECK(again.train_known.samples == s.train_known.samples);

  const ClassSplit all = split_by_classes(ds, {0, 1, 2, 3}, 1.0 / 6.0, 11);
  CHECK(all.test_novel.empty());
  CHECK(all.novel_classes.empty());

  CHECK_THROWS_AS(split_by_classes(ds, {}, 0.2, 1), ArgumentError);
  CHECK_THROWS_AS(split_by_classes(ds, {0, 9}, 0.2, 1), ArgumentError);
  CHECK_THROWS_AS(split_by_classes(ds, {0}, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(split_by_classes(ds, {0}, 1.0, 1), ArgumentError);
}

TEST_CASE("synth_xor") {
  const Dataset ds = synth_xor(400, 5);
  ds.validate();
  CHECK(ds.size() == 400);
  CHECK(std::count(ds.labels.begin(), ds.labels.end(), 0) == 200);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& x = ds.samples[i];
    CHECK((x.array() >= 0).all());
    CHECK((x.array() <= 1).all());
    // Truth table against the nearest corner for points clearly in a quadrant.
    if (std::abs(x[0] - 0.5) > 0.3 && std::abs(x[1] - 0.5) > 0.3)
      CHECK(ds.labels[i] == ((x[0] > 0.5) != (x[1] > 0.5) ? 1 : 0));
  }
  const Dataset again = synth_xor(400, 5);
  CHECK(again.samples == ds.samples);
  CHECK_THROWS_AS(synth_xor(3, 1), ArgumentError);
}

TEST_CASE("synth_playground") {
  const Dataset ds = synth_playground(400, 8);
  ds.validate();
  CHECK(std::count(ds.labels.begin(), ds.labels.end(), 1) == 200);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double r = (ds.samples[i] - vec({0.5, 0.5})).norm();
    CHECK((ds.samples[i].array() >= 0).all());
    CHECK((ds.samples[i].array() <= 1).all());
    // Rings are 0.2 apart and sigma is 0.03: the midpoint separates them.
    CHECK(ds.labels[i] == (r > 0.25 ? 1 : 0));
  }
  CHECK(synth_playground(400, 8).samples == ds.samples);
  CHECK_THROWS_AS(synth_playground(1, 1), ArgumentError);
}

TEST_CASE("Dataset invariants") {
  Dataset ds;
  ds.feature_dim = 2;
  ds.add(vec({0.1, 0.2}), 0);
  ds.validate();
  ds.samples.push_back(vec({0.1, 1.5}));
  ds.labels.push_back(1);
  CHECK_THROWS(ds.validate());
  CHECK_THROWS(ds.add(vec({0.1}), 0));
}
