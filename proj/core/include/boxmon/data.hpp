#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <vector>

#include "boxmon/nn.hpp"

namespace boxmon {

/// Labelled samples with every coordinate in [0,1].
struct Dataset {
  std::vector<Vector> samples;
  std::vector<ClassLabel> labels;
  std::size_t feature_dim = 0;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] bool empty() const { return samples.empty(); }

  void add(Vector sample, ClassLabel label);

  /// Sorted distinct labels.
  [[nodiscard]] std::vector<ClassLabel> classes() const;

  [[nodiscard]] Dataset filter(const std::set<ClassLabel>& keep) const;

  /// Throws ShapeError/ArgumentError when an invariant is broken.
  void validate() const;
};

struct ClassSplit {
  Dataset train_known;
  Dataset test_known;
  Dataset test_novel;
  std::set<ClassLabel> known_classes;
  std::set<ClassLabel> novel_classes;
};

/// Reads an IDX image file (magic 0x00000803) and its label file
/// (magic 0x00000801). Pixels are scaled by 1/255. `limit` > 0 keeps only the
/// first `limit` samples.
Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path, std::size_t limit = 0);

/// Shuffles by `seed`, sends known-class samples to train/test according to
/// `test_fraction` (per class) and every other sample to test_novel.
ClassSplit split_by_classes(const Dataset& ds, const std::set<ClassLabel>& known,
                            double test_fraction, std::uint64_t seed);

/// Four Gaussian corner blobs (sigma 0.1, clipped) labelled by XOR of the corner.
Dataset synth_xor(std::size_t n, std::uint64_t seed);

/// Two concentric rings around (0.5, 0.5): radius 0.15 is class 0, radius 0.35
/// is class 1, radial noise sigma 0.03, clipped to the unit square.
Dataset synth_playground(std::size_t n, std::uint64_t seed);

}  // namespace boxmon
