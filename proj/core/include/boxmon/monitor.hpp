#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "boxmon/data.hpp"
#include "boxmon/nn.hpp"

namespace boxmon {

/// Absolute half-width granted to zero-width box dimensions per unit of tolerance.
inline constexpr double kZeroWidthSlack = 1e-6;

/// Closed axis-aligned box in watched-layer space.
struct Box {
  Vector lo;
  Vector hi;

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }

  /// Tightest box around `points` (at least one point).
  static Box enclosing(const std::vector<Vector>& points);

  friend bool operator==(const Box& a, const Box& b) {
    return a.lo.size() == b.lo.size() && a.hi.size() == b.hi.size() && a.lo == b.lo && a.hi == b.hi;
  }
};

/// Box bounds after tolerance enlargement. With centre c and half-width w a
/// dimension spans [c - (1+tau) w, c + (1+tau) w]; a dimension with w == 0
/// spans c +/- tau * kZeroWidthSlack instead. At tau == 0 the bounds are lo/hi
/// exactly.
struct EnlargedBounds {
  Vector lo;
  Vector hi;
};
EnlargedBounds enlarge(const Box& box, double tau);

bool contains(const Box& box, const Vector& v, double tau);

struct ClassAbstraction {
  ClassLabel class_id = 0;
  std::vector<Box> boxes;
  /// Cluster count actually used (k reduced when the class had fewer samples).
  std::size_t clusters_used = 0;

  friend bool operator==(const ClassAbstraction&, const ClassAbstraction&) = default;
};

/// How deep v sits inside the abstraction: 0 when v lies outside every
/// enlarged box, otherwise the largest (over containing boxes) distance from v
/// to that box's nearest face.
double outside_depth(const ClassAbstraction& abs, const Vector& v, double tau);

/// How far v is from the abstraction: 0 when some enlarged box contains v,
/// otherwise the smallest Euclidean distance from v to an enlarged box.
double inside_gap(const ClassAbstraction& abs, const Vector& v, double tau);

struct MonitorParams {
  /// Hidden layer to watch; unset means the last hidden layer.
  std::optional<std::size_t> watched_layer;
  std::size_t clusters_per_class = 1;
  double tolerance = 0.0;
};

struct Verdict {
  ClassLabel predicted = 0;
  bool accepted = false;
};

/// Per-class box abstraction of one hidden layer plus the query tolerance.
class Monitor {
 public:
  Monitor(std::size_t watched_layer, double tolerance, std::size_t clusters_per_class,
          std::vector<ClassAbstraction> abstractions);

  [[nodiscard]] std::size_t watched_layer() const { return watched_layer_; }
  [[nodiscard]] double tolerance() const { return tolerance_; }
  [[nodiscard]] std::size_t clusters_per_class() const { return clusters_per_class_; }
  [[nodiscard]] const std::vector<ClassAbstraction>& abstractions() const { return abstractions_; }
  /// Watched-layer dimensionality (0 when there are no boxes at all).
  [[nodiscard]] std::size_t dim() const;

  /// Abstraction of `label`, or nullptr for classes without boxes.
  [[nodiscard]] const ClassAbstraction* find(ClassLabel label) const;

  /// Same boxes, different query tolerance.
  [[nodiscard]] Monitor with_tolerance(double tau) const;

  /// Accept/reject for a precomputed prediction and watched-layer vector.
  [[nodiscard]] bool accepts(ClassLabel predicted, const Vector& watched) const;

  /// Verdict from an already computed trace; only the watched layer and the
  /// logits are read.
  [[nodiscard]] Verdict judge(const DenseNetwork& net, const ForwardTrace& trace) const;

  /// Throws ShapeError/ArgumentError when `net` cannot be monitored by this.
  void check_compatible(const DenseNetwork& net) const;

  friend bool operator==(const Monitor&, const Monitor&) = default;

 private:
  std::size_t watched_layer_;
  double tolerance_;
  std::size_t clusters_per_class_;
  std::vector<ClassAbstraction> abstractions_;  // sorted by class_id
};

/// Builds one abstraction per class present in `train_known` from the
/// watched-layer vectors of the samples `net` classifies correctly: k-means
/// into at most `clusters_per_class` groups, then one enclosing box per group.
Monitor build_monitor(const DenseNetwork& net, const Dataset& train_known, const MonitorParams& params,
                      std::uint64_t seed);

/// predict(x), then check the predicted class's boxes at the watched layer.
Verdict verdict(const Monitor& mon, const DenseNetwork& net, const Vector& x);

/// Index of the last hidden layer (throws for networks without one).
std::size_t default_watched_layer(const DenseNetwork& net);

// Textual monitor file, see docs/file-formats.md.
void save_monitor(const Monitor& mon, std::ostream& out);
void save_monitor(const Monitor& mon, const std::filesystem::path& path);
Monitor load_monitor(std::istream& in, const std::string& source_name = "<stream>");
Monitor load_monitor(const std::filesystem::path& path);

}  // namespace boxmon
