#include <random>

#include <benchmark/benchmark.h>

#include "boxmon/attack.hpp"
#include "boxmon/monitor.hpp"
#include "boxmon/solvers.hpp"
#include "boxmon/training.hpp"

using namespace boxmon;

namespace {

Vector random_input(Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  return Vector::NullaryExpr(d, [&] { return u(rng); });
}

// MNIST-shaped network with a monitor built on its own predictions.
struct Fixture {
  DenseNetwork net = init_network(784, {100}, {0, 1}, 1);
  Monitor mon;
  Vector x0;

  Fixture() : mon(0, 0.0, 1, {}) {
    Dataset ds;
    ds.feature_dim = 784;
    for (std::uint64_t i = 0; i < 200; ++i) {
      Vector x = random_input(784, i);
      const auto y = net.predict(x);
      ds.add(std::move(x), y);
    }
    mon = build_monitor(net, ds, {}, 1);
    x0 = ds.samples[0];
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_Forward(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(f.net.logits(f.x0));
}
BENCHMARK(BM_Forward);

void BM_Verdict(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(verdict(f.mon, f.net, f.x0));
}
BENCHMARK(BM_Verdict);

void BM_Objective(benchmark::State& state) {
  const auto& f = fixture();
  AttackSpec spec;
  spec.kind = AttackKind::valid_to_invalid;
  const AttackProblem p(spec, f.x0, f.net, f.mon);
  const Vector x = p.bounds().clamp(f.x0 + Vector::Constant(784, 0.01));
  for (auto _ : state) benchmark::DoNotOptimize(p.objective(x));
}
BENCHMARK(BM_Objective);

void BM_InputGradient(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(f.net.input_gradient(f.x0, 0));
}
BENCHMARK(BM_InputGradient);

void BM_DifferentialEvolution(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const SearchBounds b{Vector::Constant(d, -1), Vector::Constant(d, 1)};
  SolverConfig cfg;
  cfg.budget = 20000;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_de([](const Vector& x) { return x.squaredNorm(); }, b, cfg));
}
BENCHMARK(BM_DifferentialEvolution)->Arg(2)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_BuildMonitor(benchmark::State& state) {
  const auto& f = fixture();
  Dataset ds;
  ds.feature_dim = 784;
  for (std::uint64_t i = 0; i < 500; ++i) {
    Vector x = random_input(784, 1000 + i);
    const auto y = f.net.predict(x);
    ds.add(std::move(x), y);
  }
  MonitorParams p;
  p.clusters_per_class = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_monitor(f.net, ds, p, 1));
}
BENCHMARK(BM_BuildMonitor)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
