#include <cmath>
#include <numbers>

#include "boxmon/errors.hpp"
#include "boxmon/solvers.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace boxmon;
using namespace testing;

namespace {

SearchBounds cube(Eigen::Index d, double lo, double hi) {
  return {Vector::Constant(d, lo), Vector::Constant(d, hi)};
}

double sphere(const Vector& x) { return x.squaredNorm(); }

double rastrigin(const Vector& x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) s += x[i] * x[i] - 10.0 * std::cos(2 * std::numbers::pi * x[i]);
  return s;
}

SolverConfig de_cfg(std::size_t budget, std::uint64_t seed = 1) {
  SolverConfig c;
  c.budget = budget;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("DE reaches the sphere minimum in 5-D") {
  const auto r = solve_de(sphere, cube(5, -5, 5), de_cfg(5000));
  CHECK(r.value <= 1e-3);
  CHECK(r.evaluations <= 5000);
  CHECK(r.value == sphere(r.best));
}

TEST_CASE("DE argument checks") {
  SolverConfig c = de_cfg(1000);
  c.de_population = 1;
  CHECK_THROWS_AS(solve_de(sphere, cube(3, -1, 1), c), ArgumentError);
  c.de_population = 3;
  CHECK_THROWS_AS(solve_de(sphere, cube(3, -1, 1), c), ArgumentError);
  c = de_cfg(1000);
  c.de_crossover = 0.0;
  CHECK_THROWS_AS(solve_de(sphere, cube(3, -1, 1), c), ArgumentError);
  c = de_cfg(1000);
  c.de_weight = 2.0;
  CHECK_THROWS_AS(solve_de(sphere, cube(3, -1, 1), c), ArgumentError);
  c = de_cfg(10);  // below the population of 45
  CHECK_THROWS_AS(solve_de(sphere, cube(3, -1, 1), c), ArgumentError);
}

TEST_CASE("DE default population") {
  SolverConfig c;
  CHECK(c.population_for(2) == 30);
  CHECK(c.population_for(40) == 600);
  CHECK(c.population_for(784) == 600);
  c.de_population = 12;
  CHECK(c.population_for(784) == 12);
}

TEST_CASE("DE is deterministic per seed, respects the budget and the box") {
  const auto b = cube(4, -2, 3);
  std::size_t calls = 0;
  auto counted = [&](const Vector& x) {
    ++calls;
    CHECK(b.holds(x));
    return rastrigin(x);
  };
  const auto r1 = solve_de(counted, b, de_cfg(3001, 9));
  CHECK(calls == r1.evaluations);
  CHECK(r1.evaluations <= 3001);
  const auto r2 = solve_de(rastrigin, b, de_cfg(3001, 9));
  CHECK(r1.best == r2.best);
  CHECK(r1.value == r2.value);
  CHECK(r1.generations == r2.generations);
  const auto r3 = solve_de(rastrigin, b, de_cfg(3001, 10));
  CHECK(r3.best != r1.best);
}

TEST_CASE("DE stops early once a feasible best stalls") {
  SolverConfig c = de_cfg(200000);
  c.stall_generations = 5;
  const auto r = solve_de(sphere, cube(2, -1, 1), c, [](const Vector&) { return true; });
  CHECK(r.evaluations < 200000);
}

TEST_CASE("pinned coordinates stay at their value") {
  SearchBounds b = cube(3, 0, 1);
  b.lo[1] = b.hi[1] = 0.25;
  const auto r = solve_de(sphere, b, de_cfg(2000));
  CHECK(r.best[1] == 0.25);
  CHECK(r.best[0] <= 1e-2);
  SolverConfig nm;
  nm.method = SolverMethod::nelder_mead;
  nm.budget = 2000;
  const auto q = solve_nelder_mead(sphere, b, nm, vec({0.5, 0.25, 0.5}), Vector::Constant(3, 0.05));
  CHECK(q.best[1] == 0.25);
  CHECK(q.best[0] <= 1e-4);
}

TEST_CASE("zero budget runs nothing") {
  SolverConfig c = de_cfg(0);
  CHECK(solve_de(sphere, cube(2, -1, 1), c).evaluations == 0);
  c.method = SolverMethod::nelder_mead;
  CHECK(solve_nelder_mead(sphere, cube(2, -1, 1), c, vec({0.5, 0.5}), vec({0.1, 0.1})).evaluations == 0);
}

TEST_CASE("Nelder-Mead converges to the centre of a quadratic bowl") {
  const Vector centre = vec({0.3, 0.7});
  auto bowl = [&](const Vector& x) { return (x - centre).squaredNorm() + 2.0 * std::pow(x[0] - centre[0], 2); };
  SolverConfig c;
  c.method = SolverMethod::nelder_mead;
  c.budget = 5000;
  const auto r = solve_nelder_mead(bowl, cube(2, 0, 1), c, vec({0.9, 0.1}), vec({0.05, 0.05}));
  CHECK((r.best - centre).norm() <= 1e-4);
  CHECK(r.evaluations < 5000);  // stopped on simplex size
}

TEST_CASE("Nelder-Mead vertices stay inside the box") {
  const auto b = cube(3, 0, 1);
  auto f = [&](const Vector& x) {
    CHECK(b.holds(x));
    return (x - Vector::Constant(3, 2.0)).squaredNorm();
  };
  SolverConfig c;
  c.method = SolverMethod::nelder_mead;
  c.budget = 3000;
  const auto r = solve_nelder_mead(f, b, c, vec({0.5, 0.5, 0.5}), Vector::Constant(3, 0.05));
  CHECK((r.best - Vector::Ones(3)).norm() <= 1e-4);
}

TEST_CASE("multistart Nelder-Mead does no worse than a single run on Rastrigin") {
  const auto b = cube(2, -5.12, 5.12);
  const Vector start = vec({2.3, -1.7});
  const Vector step = Vector::Constant(2, 0.05);
  SolverConfig c;
  c.budget = 4000;
  c.nm_restarts = 8;
  c.seed = 3;
  c.method = SolverMethod::nelder_mead;
  const auto single = solve_nelder_mead(rastrigin, b, c, start, step);
  c.method = SolverMethod::multistart_nm;
  const auto multi = solve_multistart_nm(rastrigin, b, c, start, step);
  CHECK(multi.value <= single.value);
  CHECK(multi.evaluations <= 4000);
  const auto again = solve_multistart_nm(rastrigin, b, c, start, step);
  CHECK(again.best == multi.best);
  CHECK(solve_nelder_mead(rastrigin, b, c, start, step).best == single.best);
}

TEST_CASE("epsilon_box clips to the unit cube") {
  const auto b = epsilon_box(vec({0.1, 0.5, 1.0}), 0.3);
  CHECK(b.lo == vec({0.0, 0.2, 0.7}));
  CHECK(b.hi[0] == doctest::Approx(0.4));
  CHECK(b.hi[2] == 1.0);
  const auto z = epsilon_box(vec({0.4}), 0.0);
  CHECK(z.lo == z.hi);
  CHECK_THROWS_AS(epsilon_box(vec({0.4}), -1.0), ArgumentError);
}

TEST_CASE("solver names") {
  CHECK(solver_from_string("de") == SolverMethod::differential_evolution);
  CHECK(solver_from_string("nelder_mead") == SolverMethod::nelder_mead);
  CHECK(std::string(to_string(SolverMethod::multistart_nm)) == "msnm");
  CHECK_THROWS_AS(solver_from_string("shgo"), ArgumentError);
}
