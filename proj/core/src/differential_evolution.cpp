#include <algorithm>
#include <random>

#include "boxmon/errors.hpp"
#include "boxmon/solvers.hpp"

namespace boxmon {

const char* to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::differential_evolution:
      return "de";
    case SolverMethod::nelder_mead:
      return "nm";
    case SolverMethod::multistart_nm:
      return "msnm";
  }
  return "?";
}

SolverMethod solver_from_string(const std::string& s) {
  if (s == "de" || s == "differential_evolution") return SolverMethod::differential_evolution;
  if (s == "nm" || s == "nelder_mead") return SolverMethod::nelder_mead;
  if (s == "msnm" || s == "multistart_nm") return SolverMethod::multistart_nm;
  throw ArgumentError("unknown solver '" + s + "' (expected de, nm or msnm)");
}

std::size_t SolverConfig::population_for(std::size_t dim) const {
  if (de_population > 0) return de_population;
  return std::min<std::size_t>(600, 15 * std::min<std::size_t>(std::max<std::size_t>(dim, 1), 40));
}

void SolverConfig::validate(std::size_t dim) const {
  if (method == SolverMethod::differential_evolution) {
    const std::size_t np = population_for(dim);
    if (np < 4) throw ArgumentError("DE population must be >= 4 (rand/1 needs three partners)");
    if (budget != 0 && budget < np) throw ArgumentError("budget must be >= DE population");
    if (!(de_crossover > 0.0 && de_crossover <= 1.0)) throw ArgumentError("de_crossover must lie in (0,1]");
    if (!(de_weight > 0.0 && de_weight < 2.0)) throw ArgumentError("de_weight must lie in (0,2)");
  }
  if (method == SolverMethod::multistart_nm && nm_restarts < 1)
    throw ArgumentError("nm_restarts must be >= 1");
}

bool SearchBounds::holds(const Vector& x) const {
  if (x.size() != lo.size()) return false;
  return ((x.array() >= lo.array()) && (x.array() <= hi.array())).all();
}

SearchBounds epsilon_box(const Vector& center, double epsilon) {
  if (!(epsilon >= 0.0)) throw ArgumentError("epsilon must be >= 0");
  SearchBounds b{center, center};
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    b.lo[i] = std::max(0.0, center[i] - epsilon);
    b.hi[i] = std::min(1.0, center[i] + epsilon);
    // Already outside [0,1]: pin to the centre.
    if (b.lo[i] > b.hi[i]) b.lo[i] = b.hi[i] = center[i];
  }
  return b;
}

SolverResult solve_de(const ObjectiveFn& f, const SearchBounds& bounds, const SolverConfig& cfg,
                      const FeasibleFn& feasible, const Vector& initial_member) {
  const std::size_t dim = bounds.dim();
  cfg.validate(dim);
  const std::size_t np = cfg.population_for(dim);
  SolverResult res;
  if (cfg.budget == 0) return res;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);

  std::vector<Vector> pop(np, Vector(d));
  std::vector<double> fit(np);
  for (std::size_t i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < d; ++j) pop[i][j] = bounds.lo[j] + u01(rng) * (bounds.hi[j] - bounds.lo[j]);
  if (initial_member.size() == d) pop[0] = bounds.clamp(initial_member);
  for (std::size_t i = 0; i < np; ++i) fit[i] = f(pop[i]);
  res.evaluations = np;

  auto best_index = [&] { return static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin()); };
  std::size_t best = best_index();
  double stall_ref = fit[best];
  std::size_t stalled = 0;
  bool best_feasible = feasible && feasible(pop[best]);

  std::uniform_int_distribution<std::size_t> pick(0, np - 1);
  std::uniform_int_distribution<Eigen::Index> pick_dim(0, d > 0 ? d - 1 : 0);
  std::vector<Vector> next = pop;
  std::vector<double> next_fit = fit;
  Vector trial(d);

  while (res.evaluations < cfg.budget) {
    ++res.generations;
    std::size_t i = 0;
    for (; i < np && res.evaluations < cfg.budget; ++i) {
      std::size_t r1, r2, r3;
      do r1 = pick(rng); while (r1 == i);
      do r2 = pick(rng); while (r2 == i || r2 == r1);
      do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const Eigen::Index jrand = pick_dim(rng);
      for (Eigen::Index j = 0; j < d; ++j) {
        if (j == jrand || u01(rng) < cfg.de_crossover) {
          double v = pop[r1][j] + cfg.de_weight * (pop[r2][j] - pop[r3][j]);
          if (v < bounds.lo[j]) v = bounds.lo[j] + u01(rng) * (pop[r1][j] - bounds.lo[j]);
          if (v > bounds.hi[j]) v = bounds.hi[j] - u01(rng) * (bounds.hi[j] - pop[r1][j]);
          trial[j] = v;
        } else {
          trial[j] = pop[i][j];
        }
      }
      const double ft = f(trial);
      ++res.evaluations;
      if (ft <= fit[i]) {
        next[i] = trial;
        next_fit[i] = ft;
      } else {
        next[i] = pop[i];
        next_fit[i] = fit[i];
      }
    }
    for (; i < np; ++i) {
      next[i] = pop[i];
      next_fit[i] = fit[i];
    }
    pop.swap(next);
    fit.swap(next_fit);

    const std::size_t nb = best_index();
    if (nb != best || fit[nb] < stall_ref) best_feasible = feasible && feasible(pop[nb]);
    best = nb;
    if (fit[best] < stall_ref) {
      stall_ref = fit[best];
      stalled = 0;
    } else {
      ++stalled;
    }
    if (best_feasible && stalled >= cfg.stall_generations) break;
  }

  res.best = pop[best];
  res.value = fit[best];
  return res;
}

}  // namespace boxmon
