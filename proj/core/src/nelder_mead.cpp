#include <algorithm>
#include <numeric>
#include <random>

#include "boxmon/errors.hpp"
#include "boxmon/solvers.hpp"

namespace boxmon {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;
constexpr double kMinDiameter = 1e-8;

// Works in the subspace of free (unpinned) coordinates.
class ReducedProblem {
 public:
  ReducedProblem(const ObjectiveFn& f, const SearchBounds& bounds, const Vector& anchor)
      : f_(f), full_(bounds.clamp(anchor)) {
    for (Eigen::Index i = 0; i < bounds.lo.size(); ++i)
      if (bounds.lo[i] < bounds.hi[i]) free_.push_back(i);
    lo_.resize(static_cast<Eigen::Index>(free_.size()));
    hi_.resize(lo_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) {
      lo_[static_cast<Eigen::Index>(k)] = bounds.lo[free_[k]];
      hi_[static_cast<Eigen::Index>(k)] = bounds.hi[free_[k]];
    }
  }

  [[nodiscard]] std::size_t dim() const { return free_.size(); }
  [[nodiscard]] Vector reduce(const Vector& x) const {
    Vector r(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t k = 0; k < free_.size(); ++k) r[static_cast<Eigen::Index>(k)] = x[free_[k]];
    return r;
  }
  [[nodiscard]] Vector expand(const Vector& r) const {
    Vector x = full_;
    for (std::size_t k = 0; k < free_.size(); ++k) x[free_[k]] = r[static_cast<Eigen::Index>(k)];
    return x;
  }
  [[nodiscard]] Vector clip(const Vector& r) const { return r.cwiseMax(lo_).cwiseMin(hi_); }
  [[nodiscard]] double lo(std::size_t k) const { return lo_[static_cast<Eigen::Index>(k)]; }
  [[nodiscard]] double hi(std::size_t k) const { return hi_[static_cast<Eigen::Index>(k)]; }
  [[nodiscard]] Eigen::Index full_index(std::size_t k) const { return free_[k]; }

  double eval(const Vector& r) {
    ++evaluations;
    return f_(expand(r));
  }

  std::size_t evaluations = 0;

 private:
  const ObjectiveFn& f_;
  Vector full_;
  std::vector<Eigen::Index> free_;
  Vector lo_, hi_;
};

SolverResult run_nm(const ObjectiveFn& f, const SearchBounds& bounds, std::size_t budget, const Vector& start,
                    const Vector& step) {
  ReducedProblem p(f, bounds, start);
  SolverResult res;
  const std::size_t n = p.dim();
  const Vector x0 = p.clip(p.reduce(bounds.clamp(start)));
  if (budget == 0) return res;

  std::vector<Vector> simplex{x0};
  std::vector<double> values{p.eval(x0)};
  for (std::size_t k = 0; k < n && p.evaluations < budget; ++k) {
    Vector v = x0;
    const auto i = static_cast<Eigen::Index>(k);
    double h = step[p.full_index(k)];
    if (h == 0.0) h = 0.05 * (p.hi(k) - p.lo(k));
    if (v[i] + h > p.hi(k)) h = -h;
    v[i] = std::clamp(v[i] + h, p.lo(k), p.hi(k));
    values.push_back(p.eval(v));
    simplex.push_back(std::move(v));
  }

  auto finish = [&] {
    const auto b = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    res.best = p.expand(simplex[b]);
    res.value = values[b];
    res.evaluations = p.evaluations;
    return res;
  };
  if (simplex.size() < n + 1 || n == 0) return finish();

  // Running vertex sum keeps the centroid O(d) per iteration; the diameter
  // test (O(n d)) runs once every n iterations.
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(n));
  for (const auto& v : simplex) sum += v;
  auto replace = [&](std::size_t k, Vector x, double fx) {
    sum += x - simplex[k];
    simplex[k] = std::move(x);
    values[k] = fx;
  };

  std::size_t since_check = n;
  while (p.evaluations < budget) {
    std::size_t best = 0, worst = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (values[k] < values[best]) best = k;
      if (values[k] >= values[worst]) worst = k;
    }
    if (best == worst) worst = best == 0 ? 1 : 0;
    std::size_t second_worst = best;
    for (std::size_t k = 0; k <= n; ++k)
      if (k != worst && values[k] >= values[second_worst]) second_worst = k;

    if (++since_check >= n) {
      since_check = 0;
      double diameter = 0.0;
      for (std::size_t k = 0; k <= n; ++k) diameter = std::max(diameter, (simplex[k] - simplex[best]).norm());
      if (diameter < kMinDiameter) break;
    }
    ++res.generations;

    const Vector centroid = (sum - simplex[worst]) / static_cast<double>(n);
    Vector xr = p.clip(centroid + kReflect * (centroid - simplex[worst]));
    const double fr = p.eval(xr);
    if (fr < values[best]) {
      if (p.evaluations >= budget) {
        replace(worst, std::move(xr), fr);
        break;
      }
      Vector xe = p.clip(centroid + kExpand * (xr - centroid));
      const double fe = p.eval(xe);
      if (fe < fr)
        replace(worst, std::move(xe), fe);
      else
        replace(worst, std::move(xr), fr);
      continue;
    }
    if (fr < values[second_worst]) {
      replace(worst, std::move(xr), fr);
      continue;
    }
    if (p.evaluations >= budget) break;
    const bool outside = fr < values[worst];
    Vector xc = outside ? p.clip(centroid + kContract * (xr - centroid))
                        : p.clip(centroid + kContract * (simplex[worst] - centroid));
    const double fc = p.eval(xc);
    if (fc < (outside ? fr : values[worst])) {
      replace(worst, std::move(xc), fc);
      continue;
    }
    for (std::size_t k = 0; k <= n && p.evaluations < budget; ++k) {
      if (k == best) continue;
      Vector xs = p.clip(simplex[best] + kShrink * (simplex[k] - simplex[best]));
      const double fs = p.eval(xs);
      replace(k, std::move(xs), fs);
    }
    since_check = n;  // a shrink can collapse the simplex at once
  }
  return finish();
}

}  // namespace

SolverResult solve_nelder_mead(const ObjectiveFn& f, const SearchBounds& bounds, const SolverConfig& cfg,
                               const Vector& start, const Vector& step) {
  if (start.size() != bounds.lo.size() || step.size() != bounds.lo.size())
    throw ShapeError("Nelder-Mead start/step length does not match bounds");
  return run_nm(f, bounds, cfg.budget, start, step);
}

SolverResult solve_multistart_nm(const ObjectiveFn& f, const SearchBounds& bounds, const SolverConfig& cfg,
                                 const Vector& start, const Vector& step) {
  cfg.validate(bounds.dim());
  if (start.size() != bounds.lo.size() || step.size() != bounds.lo.size())
    throw ShapeError("Nelder-Mead start/step length does not match bounds");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t restarts = cfg.nm_restarts;
  SolverResult best;
  bool have = false;
  std::size_t spent = 0;
  for (std::size_t r = 0; r < restarts; ++r) {
    // Even split; the last run also gets whatever earlier runs left unused.
    const std::size_t share = r + 1 == restarts ? cfg.budget - spent : cfg.budget / restarts;
    Vector x = start;
    if (r > 0)
      for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = bounds.lo[j] + u01(rng) * (bounds.hi[j] - bounds.lo[j]);
    SolverResult run = run_nm(f, bounds, share, x, step);
    spent += run.evaluations;
    if (run.evaluations > 0 && (!have || run.value < best.value)) {
      const std::size_t total = spent;
      const std::size_t gens = best.generations + run.generations;
      best = std::move(run);
      best.generations = gens;
      best.evaluations = total;
      have = true;
    } else {
      best.evaluations = spent;
      best.generations += run.generations;
    }
  }
  return best;
}

}  // namespace boxmon
