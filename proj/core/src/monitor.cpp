#include "boxmon/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "boxmon/errors.hpp"
#include "boxmon/kmeans.hpp"

namespace boxmon {

Box Box::enclosing(const std::vector<Vector>& points) {
  if (points.empty()) throw ArgumentError("cannot enclose an empty point set");
  Box b{points.front(), points.front()};
  for (const auto& p : points) {
    if (p.size() != b.lo.size()) throw ShapeError("points of differing dimension");
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

namespace {

// lo - tau*w == c - (1+tau)*w, written so that tau == 0 reproduces lo/hi bit for bit.
inline double growth(const Box& box, Eigen::Index i, double tau) {
  const double w = 0.5 * (box.hi[i] - box.lo[i]);
  return w > 0.0 ? tau * w : tau * kZeroWidthSlack;
}

}  // namespace

EnlargedBounds enlarge(const Box& box, double tau) {
  EnlargedBounds e{box.lo, box.hi};
  for (Eigen::Index i = 0; i < box.lo.size(); ++i) {
    const double g = growth(box, i, tau);
    e.lo[i] -= g;
    e.hi[i] += g;
  }
  return e;
}

namespace {

void check_dim(const Box& box, const Vector& v) {
  if (box.lo.size() != v.size() || box.hi.size() != v.size())
    throw ShapeError("box has dimension " + std::to_string(box.lo.size()) + ", vector has " +
                     std::to_string(v.size()));
}

bool inside(const EnlargedBounds& e, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!(e.lo[i] <= v[i] && v[i] <= e.hi[i])) return false;
  return true;
}

}  // namespace

bool contains(const Box& box, const Vector& v, double tau) {
  check_dim(box, v);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double g = growth(box, i, tau);
    if (!(box.lo[i] - g <= v[i] && v[i] <= box.hi[i] + g)) return false;
  }
  return true;
}

double outside_depth(const ClassAbstraction& abs, const Vector& v, double tau) {
  double best = 0.0;
  for (const auto& box : abs.boxes) {
    check_dim(box, v);
    const auto e = enlarge(box, tau);
    if (!inside(e, v)) continue;
    double depth = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.size(); ++i)
      depth = std::min({depth, v[i] - e.lo[i], e.hi[i] - v[i]});
    best = std::max(best, depth);
  }
  return best;
}

double inside_gap(const ClassAbstraction& abs, const Vector& v, double tau) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& box : abs.boxes) {
    check_dim(box, v);
    const auto e = enlarge(box, tau);
    double sq = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double h = std::max({e.lo[i] - v[i], 0.0, v[i] - e.hi[i]});
      sq += h * h;
    }
    best = std::min(best, std::sqrt(sq));
  }
  return best;
}

Monitor::Monitor(std::size_t watched_layer, double tolerance, std::size_t clusters_per_class,
                 std::vector<ClassAbstraction> abstractions)
    : watched_layer_(watched_layer),
      tolerance_(tolerance),
      clusters_per_class_(clusters_per_class),
      abstractions_(std::move(abstractions)) {
  if (!(tolerance_ >= 0.0) || !std::isfinite(tolerance_)) throw ArgumentError("tolerance must be >= 0");
  if (clusters_per_class_ < 1) throw ArgumentError("clusters_per_class must be >= 1");
  std::sort(abstractions_.begin(), abstractions_.end(),
            [](const auto& a, const auto& b) { return a.class_id < b.class_id; });
  std::optional<Eigen::Index> dim;
  for (std::size_t i = 0; i < abstractions_.size(); ++i) {
    const auto& a = abstractions_[i];
    if (i > 0 && abstractions_[i - 1].class_id == a.class_id)
      throw ArgumentError("duplicate abstraction for class " + std::to_string(a.class_id));
    if (a.boxes.size() > clusters_per_class_)
      throw ArgumentError("class " + std::to_string(a.class_id) + " has more boxes than clusters_per_class");
    for (const auto& b : a.boxes) {
      if (b.lo.size() != b.hi.size()) throw ShapeError("box lo/hi length mismatch");
      if (dim && *dim != b.lo.size()) throw ShapeError("boxes of differing dimension");
      dim = b.lo.size();
      for (Eigen::Index j = 0; j < b.lo.size(); ++j)
        if (!(b.lo[j] <= b.hi[j])) throw ArgumentError("box with lo > hi");
    }
  }
}

std::size_t Monitor::dim() const {
  for (const auto& a : abstractions_)
    if (!a.boxes.empty()) return a.boxes.front().dim();
  return 0;
}

const ClassAbstraction* Monitor::find(ClassLabel label) const {
  auto it = std::lower_bound(abstractions_.begin(), abstractions_.end(), label,
                             [](const ClassAbstraction& a, ClassLabel l) { return a.class_id < l; });
  if (it == abstractions_.end() || it->class_id != label) return nullptr;
  return &*it;
}

Monitor Monitor::with_tolerance(double tau) const {
  return Monitor(watched_layer_, tau, clusters_per_class_, abstractions_);
}

bool Monitor::accepts(ClassLabel predicted, const Vector& watched) const {
  const ClassAbstraction* abs = find(predicted);
  if (!abs) return false;
  return std::any_of(abs->boxes.begin(), abs->boxes.end(),
                     [&](const Box& b) { return contains(b, watched, tolerance_); });
}

Verdict Monitor::judge(const DenseNetwork& net, const ForwardTrace& trace) const {
  if (watched_layer_ >= trace.per_layer.size()) throw ShapeError("trace lacks the watched layer");
  Verdict v;
  v.predicted = net.class_labels()[argmax(trace.logits)];
  v.accepted = accepts(v.predicted, trace.per_layer[watched_layer_]);
  return v;
}

void Monitor::check_compatible(const DenseNetwork& net) const {
  if (watched_layer_ + 1 >= net.num_layers())
    throw ArgumentError("watched layer " + std::to_string(watched_layer_) + " is not a hidden layer");
  const std::size_t d = dim();
  if (d != 0 && d != net.layers()[watched_layer_].out_dim())
    throw ShapeError("monitor dimension does not match watched layer width");
}

std::size_t default_watched_layer(const DenseNetwork& net) {
  if (net.num_layers() < 2) throw ArgumentError("network has no hidden layer to watch");
  return net.num_layers() - 2;
}

Monitor build_monitor(const DenseNetwork& net, const Dataset& train_known, const MonitorParams& params,
                      std::uint64_t seed) {
  const std::size_t layer = params.watched_layer.value_or(default_watched_layer(net));
  if (layer + 1 >= net.num_layers())
    throw ArgumentError("watched layer " + std::to_string(layer) + " is not a hidden layer");
  if (params.clusters_per_class < 1) throw ArgumentError("clusters_per_class must be >= 1");
  if (!(params.tolerance >= 0.0)) throw ArgumentError("tolerance must be >= 0");

  std::map<ClassLabel, std::vector<Vector>> collected;
  for (std::size_t i = 0; i < train_known.size(); ++i) {
    const ClassLabel y = train_known.labels[i];
    if (!net.knows(y)) throw UnknownClassError("training label " + std::to_string(y) + " unknown to network");
    ForwardTrace t = net.forward(train_known.samples[i]);
    if (net.class_labels()[argmax(t.logits)] != y) continue;
    collected[y].push_back(std::move(t.per_layer[layer]));
  }

  std::vector<ClassAbstraction> abstractions;
  for (auto& [label, vecs] : collected) {
    ClassAbstraction abs;
    abs.class_id = label;
    abs.clusters_used = std::min(params.clusters_per_class, vecs.size());
    const std::uint64_t class_seed = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(label + 1);
    const auto assign = kmeans(vecs, abs.clusters_used, class_seed);
    std::vector<std::vector<Vector>> groups(abs.clusters_used);
    for (std::size_t i = 0; i < vecs.size(); ++i) groups[assign[i]].push_back(vecs[i]);
    for (const auto& g : groups)
      if (!g.empty()) abs.boxes.push_back(Box::enclosing(g));
    abstractions.push_back(std::move(abs));
  }
  return Monitor(layer, params.tolerance, params.clusters_per_class, std::move(abstractions));
}

Verdict verdict(const Monitor& mon, const DenseNetwork& net, const Vector& x) {
  Vector watched;
  const Vector logits = net.logits_and_layer(x, mon.watched_layer(), watched);
  Verdict v;
  v.predicted = net.class_labels()[argmax(logits)];
  v.accepted = mon.accepts(v.predicted, watched);
  return v;
}

}  // namespace boxmon
