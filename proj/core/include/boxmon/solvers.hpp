#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "boxmon/nn.hpp"

namespace boxmon {

enum class SolverMethod { differential_evolution, nelder_mead, multistart_nm };

const char* to_string(SolverMethod m);
SolverMethod solver_from_string(const std::string& s);

struct SolverConfig {
  SolverMethod method = SolverMethod::differential_evolution;
  std::uint64_t seed = 1;
  /// Maximum objective evaluations; 0 disables the search entirely.
  std::size_t budget = 20000;
  /// 0 selects 15 * min(dim, 40), capped at 600.
  std::size_t de_population = 0;
  double de_weight = 0.7;
  double de_crossover = 0.9;
  std::size_t nm_restarts = 8;
  /// DE stops once the best member is feasible and its value has not improved
  /// for this many generations.
  std::size_t stall_generations = 20;

  [[nodiscard]] std::size_t population_for(std::size_t dim) const;
  /// Throws ArgumentError for out-of-range parameters given the problem size.
  void validate(std::size_t dim) const;
};

/// Per-coordinate search interval; lo[i] == hi[i] pins coordinate i.
struct SearchBounds {
  Vector lo;
  Vector hi;

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }
  [[nodiscard]] Vector clamp(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }
  [[nodiscard]] bool holds(const Vector& x) const;
};

/// [max(0, c_i - eps), min(1, c_i + eps)] around `center`.
SearchBounds epsilon_box(const Vector& center, double epsilon);

using ObjectiveFn = std::function<double(const Vector&)>;
/// Exact feasibility test used by DE's early stop.
using FeasibleFn = std::function<bool(const Vector&)>;

struct SolverResult {
  Vector best;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::size_t generations = 0;  // DE generations or NM iterations
};

/// DE/rand/1/bin. Members start uniform in `bounds`; mutants leaving the box
/// are bounced to a uniform point between the base vector and the violated
/// bound; greedy one-to-one selection. Never exceeds cfg.budget evaluations.
/// `initial_member`, when non-empty, replaces the first random member.
SolverResult solve_de(const ObjectiveFn& f, const SearchBounds& bounds, const SolverConfig& cfg,
                      const FeasibleFn& feasible = {}, const Vector& initial_member = {});

/// Nelder-Mead (reflection 1, expansion 2, contraction 0.5, shrink 0.5) over the
/// free coordinates. Initial simplex: `start` plus one vertex per free
/// coordinate offset by step[i] (flipped inward when it would leave the box).
/// Vertices are clipped to the box. Stops when the simplex diameter drops
/// below 1e-8 or the evaluation budget is spent.
SolverResult solve_nelder_mead(const ObjectiveFn& f, const SearchBounds& bounds, const SolverConfig& cfg,
                               const Vector& start, const Vector& step);

/// cfg.nm_restarts Nelder-Mead runs sharing the budget evenly: the first from
/// `start`, the rest from uniform points drawn from cfg.seed. Best run wins.
SolverResult solve_multistart_nm(const ObjectiveFn& f, const SearchBounds& bounds, const SolverConfig& cfg,
                                 const Vector& start, const Vector& step);

}  // namespace boxmon
