#include <limits>

#include "boxmon/attack.hpp"
#include "boxmon/errors.hpp"
#include "boxmon/training.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace boxmon;
using namespace testing;

namespace {

// 1-D input, watched h = relu(2x - 0.5), logits (h, -h): always class 0.
DenseNetwork line_net() {
  return DenseNetwork({{vec({2.0}).asDiagonal().toDenseMatrix(), vec({-0.5}), Activation::relu},
                       {vec({1.0, -1.0}).reshaped(2, 1), Vector::Zero(2), Activation::identity}},
                      {0, 1});
}

Monitor unit_box_monitor() {
  return Monitor(0, 0.0, 1, {ClassAbstraction{0, {Box{vec({0.0}), vec({1.0})}}, 1}});
}

struct Instance {
  DenseNetwork net;
  Monitor mon;
  std::vector<Vector> samples;
};

// Random small net with a monitor built on its own predictions.
Instance random_instance(std::uint64_t seed, std::size_t clusters = 1, double tau = 0.0) {
  DenseNetwork net = random_net({4, 6, 3}, seed);
  std::mt19937_64 rng(seed * 7 + 1);
  Dataset ds;
  ds.feature_dim = 4;
  for (int i = 0; i < 40; ++i) {
    Vector x = uniform_vector(4, rng, 0, 1);
    const ClassLabel y = net.predict(x);
    ds.add(std::move(x), y);
  }
  MonitorParams p;
  p.clusters_per_class = clusters;
  p.tolerance = tau;
  Monitor mon = build_monitor(net, ds, p, seed);
  return {std::move(net), std::move(mon), ds.samples};
}

Instance xor_instance() {
  const Dataset ds = synth_xor(400, 12);
  TrainConfig cfg;
  cfg.hidden_dims = {8};
  cfg.epochs = 200;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.1;
  cfg.seed = 5;
  DenseNetwork net = train(cfg, ds);
  Monitor mon = build_monitor(net, ds, {}, 1);
  return {std::move(net), std::move(mon), ds.samples};
}

}  // namespace

TEST_CASE("objective at the starting point and at feasible points") {
  const auto net = line_net();
  const auto mon = unit_box_monitor();
  AttackSpec spec;
  spec.epsilon = 0.5;
  spec.violation_offset = 0.0;
  const AttackProblem p(spec, vec({0.5}), net, mon);
  REQUIRE(p.starting_condition_holds());
  // Watched value 0.5 sits 0.5 from both faces.
  CHECK(p.distance(vec({0.5})) == 0.0);
  CHECK(p.objective(vec({0.5})) == doctest::Approx(spec.penalty_monitor * 0.5));
  CHECK(p.objective(vec({0.5})) > 0.0);

  AttackSpec with_offset = spec;
  with_offset.violation_offset = 1.0;
  const AttackProblem q(with_offset, vec({0.5}), net, mon);
  CHECK(q.objective(vec({0.5})) == doctest::Approx(spec.penalty_monitor * 1.5));

  // x = 0.9 gives h = 1.3: rejected with the same label, so only the norm remains.
  CHECK(p.success(vec({0.9})));
  CHECK(p.objective(vec({0.9})) == doctest::Approx(0.4));
  CHECK(q.objective(vec({0.9})) == doctest::Approx(0.4));
  CHECK_FALSE(p.success(vec({0.5})));
}

TEST_CASE("1-D valid_to_invalid attack matches a dense grid scan") {
  const auto net = line_net();
  const auto mon = unit_box_monitor();
  AttackSpec spec;
  spec.epsilon = 0.5;
  spec.norm = Norm::L2;
  const Vector x0 = vec({0.5});
  const AttackProblem p(spec, x0, net, mon);

  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 100000; ++i) {
    const Vector x = vec({i / 100000.0});
    if (p.success(x)) best = std::min(best, p.distance(x));
  }
  CHECK(best == doctest::Approx(0.25).epsilon(1e-4));  // h crosses 1 at x = 0.75

  SolverConfig cfg;
  cfg.budget = 3000;
  cfg.seed = 2;
  const AttackResult r = run_attack(p, cfg);
  REQUIRE(r.success);
  CHECK(*r.norm_achieved >= best - 1e-5);
  CHECK(*r.norm_achieved <= best + 1e-3);
}

TEST_CASE("success predicate") {
  const auto inst = random_instance(3);
  for (AttackKind kind : {AttackKind::valid_to_invalid, AttackKind::invalid_to_valid}) {
    AttackSpec spec;
    spec.kind = kind;
    for (const auto& x0 : inst.samples) {
      const AttackProblem p(spec, x0, inst.net, inst.mon);
      if (p.starting_condition_holds()) CHECK_FALSE(p.success(x0));
    }
  }
  // Rejected point with the same label counts for valid_to_invalid.
  const auto net = line_net();
  const auto mon = unit_box_monitor();
  AttackSpec spec;
  spec.epsilon = 0.5;
  const AttackProblem p(spec, vec({0.5}), net, mon);
  for (double x : {0.8, 0.9, 1.0}) CHECK(p.success(vec({x})));
  for (double x : {0.0, 0.3, 0.7}) CHECK_FALSE(p.success(vec({x})));
}

TEST_CASE("surrogate-zero implies success on random instances") {
  std::size_t zero_hits = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto inst = random_instance(seed, 1 + seed % 3, seed % 2 ? 0.1 : 0.0);
    std::mt19937_64 rng(seed);
    for (AttackKind kind : {AttackKind::valid_to_invalid, AttackKind::invalid_to_valid})
      for (bool keep : {true, false}) {
        AttackSpec spec;
        spec.kind = kind;
        spec.preserve_prediction = keep;
        spec.epsilon = 0.5;
        for (const auto& x0 : inst.samples) {
          const AttackProblem p(spec, x0, inst.net, inst.mon);
          for (int k = 0; k < 5; ++k) {
            const Vector x = p.bounds().clamp(x0 + uniform_vector(4, rng, -0.5, 0.5));
            const double gm = p.monitor_surrogate(x), gp = p.label_surrogate(x);
            CHECK(gm >= 0);
            CHECK(gp >= 0);
            CHECK(p.objective(x) >= 0);
            if (gm == 0 && gp == 0) {
              ++zero_hits;
              CHECK(p.success(x));
            }
          }
        }
      }
  }
  CHECK(zero_hits > 100);
}

TEST_CASE("without the violation offset a relu face gives zero depth while still accepted") {
  // Watched unit pinned at 0 by relu; the box's lower face is 0 too.
  const auto net = line_net();
  const auto mon = unit_box_monitor();
  AttackSpec spec;
  spec.epsilon = 0.5;
  spec.violation_offset = 0.0;
  const AttackProblem bare(spec, vec({0.5}), net, mon);
  const Vector x = vec({0.1});  // h = relu(-0.3) = 0
  CHECK(bare.monitor_surrogate(x) == 0.0);
  CHECK_FALSE(bare.success(x));
  spec.violation_offset = 1.0;
  const AttackProblem offset(spec, vec({0.5}), net, mon);
  CHECK(offset.monitor_surrogate(x) == 1.0);
}

TEST_CASE("objective below the penalty floor means both constraints hold") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const auto inst = random_instance(seed, 2);
    std::mt19937_64 rng(seed);
    AttackSpec spec;
    spec.epsilon = 0.5;
    spec.kind = seed % 2 ? AttackKind::valid_to_invalid : AttackKind::invalid_to_valid;
    // Problem diameter: L2 extent of the search box.
    const double diameter = 2 * spec.epsilon * std::sqrt(4.0);
    spec.penalty_monitor = spec.penalty_pred = 1e3 * diameter;
    const double floor = std::min(spec.penalty_monitor, spec.penalty_pred) * spec.violation_offset;
    for (const auto& x0 : inst.samples) {
      const AttackProblem p(spec, x0, inst.net, inst.mon);
      for (int k = 0; k < 10; ++k) {
        const Vector x = p.bounds().clamp(x0 + uniform_vector(4, rng, -0.5, 0.5));
        const double f = p.objective(x);
        if (f < floor) {
          CHECK(p.monitor_surrogate(x) == 0.0);
          CHECK(p.label_surrogate(x) == 0.0);
        } else {
          CHECK_FALSE(p.success(x));
        }
      }
    }
  }
}

TEST_CASE("epigraph form of the L1 norm") {
  const Vector x0 = vec({0.5, 0.5});
  const Vector x = vec({0.8, 0.3});
  const auto e = epigraph_l1(x, x0, vec({0.35, 0.25}));
  CHECK(e.feasible());
  CHECK(e.objective() == doctest::Approx(0.6));
  CHECK(epigraph_l1(x, x0).objective() == (x - x0).lpNorm<1>());
  CHECK_FALSE(epigraph_l1(x, x0, Vector::Zero(2)).feasible());
  // Per coordinate the smallest feasible z_i is |x_i - x0_i|.
  const auto tight = epigraph_l1(x, x0);
  CHECK(tight.z == (x - x0).cwiseAbs());
  for (Eigen::Index i = 0; i < 2; ++i) {
    Vector z = tight.z;
    z[i] -= 1e-9;
    CHECK_FALSE(epigraph_l1(x, x0, z).feasible());
  }
  CHECK_THROWS_AS(epigraph_l1(x, vec({1.0}), Vector::Zero(2)), ShapeError);
}

TEST_CASE("epsilon = 0 cannot succeed") {
  const auto inst = xor_instance();
  AttackSpec spec;
  spec.epsilon = 0.0;
  SolverConfig cfg;
  cfg.budget = 500;
  for (int i = 0; i < 5; ++i) {
    const auto r = attack(spec, cfg, inst.samples[i], inst.net, inst.mon);
    CHECK_FALSE(r.success);
  }
}

TEST_CASE("not-applicable when the start point breaks the precondition") {
  const auto net = line_net();
  const auto mon = unit_box_monitor();
  AttackSpec spec;
  spec.kind = AttackKind::invalid_to_valid;
  const auto r = attack(spec, SolverConfig{}, vec({0.5}), net, mon);
  CHECK_FALSE(r.applicable);
  CHECK_FALSE(r.success);
  CHECK(r.evaluations == 0);
}

TEST_CASE("XOR valid_to_invalid: DE finds every attack a grid scan finds and beats Nelder-Mead") {
  const auto inst = xor_instance();
  AttackSpec spec;
  spec.epsilon = 0.5;
  std::size_t de = 0, nm = 0, reachable = 0, tried = 0;
  for (std::size_t i = 0; tried < 20 && i < inst.samples.size(); ++i) {
    const AttackProblem p(spec, inst.samples[i], inst.net, inst.mon);
    if (!p.starting_condition_holds()) continue;
    ++tried;
    double grid = std::numeric_limits<double>::infinity();
    const auto& b = p.bounds();
    for (int u = 0; u <= 200; ++u)
      for (int v = 0; v <= 200; ++v) {
        const Vector x = b.lo + (b.hi - b.lo).cwiseProduct(vec({u / 200.0, v / 200.0}));
        if (p.success(x)) grid = std::min(grid, p.distance(x));
      }
    SolverConfig cfg;
    cfg.budget = 20000;
    cfg.seed = i;
    const auto r = run_attack(p, cfg);
    de += r.success;
    cfg.method = SolverMethod::nelder_mead;
    nm += run_attack(p, cfg).success;
    if (std::isfinite(grid)) {
      ++reachable;
      CHECK(r.success);
    }
    if (r.success) {
      CHECK(*r.norm_achieved <= grid + 5e-3);
      CHECK((*r.x_adv - inst.samples[i]).lpNorm<Eigen::Infinity>() <= spec.epsilon + 1e-12);
      CHECK((r.x_adv->array() >= 0).all());
      CHECK((r.x_adv->array() <= 1).all());
      CHECK(*r.norm_achieved == doctest::Approx(r.norms.l1));
    }
    CHECK(r.evaluations <= cfg.budget);
  }
  REQUIRE(tried == 20);
  CHECK(reachable >= 5);
  CHECK(de >= nm);
}

TEST_CASE("XOR valid_to_invalid from one start: DE succeeds on most of 20 seeds, NM no more often") {
  const auto inst = xor_instance();
  AttackSpec spec;
  spec.epsilon = 0.5;
  // First start with a reachable attack (the grid test above finds it).
  const Vector& x0 = inst.samples[0];
  const AttackProblem p(spec, x0, inst.net, inst.mon);
  REQUIRE(p.starting_condition_holds());
  std::size_t de = 0, nm = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SolverConfig cfg;
    cfg.budget = 20000;
    cfg.seed = seed;
    de += run_attack(p, cfg).success;
    cfg.method = SolverMethod::nelder_mead;
    nm += run_attack(p, cfg).success;
  }
  CHECK(de > 10);
  CHECK(de >= nm);
}

TEST_CASE("attacks are deterministic") {
  const auto inst = random_instance(44);
  for (SolverMethod m : {SolverMethod::differential_evolution, SolverMethod::nelder_mead, SolverMethod::multistart_nm})
    for (AttackKind kind : {AttackKind::valid_to_invalid, AttackKind::invalid_to_valid}) {
      AttackSpec spec;
      spec.kind = kind;
      spec.norm = Norm::L2;
      SolverConfig cfg;
      cfg.method = m;
      cfg.budget = 1500;
      cfg.seed = 3;
      for (int i = 0; i < 4; ++i) {
        const auto a = attack(spec, cfg, inst.samples[i], inst.net, inst.mon);
        const auto b = attack(spec, cfg, inst.samples[i], inst.net, inst.mon);
        CHECK(a.applicable == b.applicable);
        CHECK(a.success == b.success);
        CHECK(a.evaluations == b.evaluations);
        CHECK(a.best_objective == b.best_objective);
        if (a.success) CHECK(*a.x_adv == *b.x_adv);
      }
    }
}

TEST_CASE("fgsm") {
  const auto net = random_net({6, 5, 3}, 2);
  std::mt19937_64 rng(1);
  const Vector x0 = uniform_vector(6, rng, 0, 1);
  CHECK(fgsm(net, x0, 0.0) == x0);
  const Vector x1 = fgsm(net, x0, 0.2);
  const Vector g = net.input_gradient(x0, net.predict(x0));
  for (Eigen::Index i = 0; i < 6; ++i) {
    const double d = x1[i] - x0[i];
    const bool clipped = x1[i] == 0.0 || x1[i] == 1.0;
    CHECK((std::abs(std::abs(d) - 0.2) < 1e-15 || clipped || g[i] == 0.0));
    if (!clipped && g[i] != 0.0) CHECK((d > 0) == (g[i] > 0));
  }
}

TEST_CASE("combined attack short-circuits and reports not-applicable") {
  // Linear 2-class net: FGSM moves every coordinate by eps toward class 1.
  Matrix w(2, 2);
  w << 1, 0, 0, 1;
  Matrix o(2, 2);
  o << 1, -1, -1, 1;
  DenseNetwork net({{w, Vector::Zero(2), Activation::relu}, {o, Vector::Zero(2), Activation::identity}}, {0, 1});
  const Vector x0 = vec({0.55, 0.45});  // class 0, margin 0.1
  REQUIRE(net.predict(x0) == 0);
  AttackSpec spec;
  spec.kind = AttackKind::invalid_to_valid;
  spec.preserve_prediction = false;
  SolverConfig cfg;
  cfg.budget = 2000;

  // Class 1 box covers the FGSM point (0.35, 0.65): immediate success.
  Monitor wide(0, 0.0, 1, {ClassAbstraction{1, {Box{vec({0.0, 0.5}), vec({0.5, 1.0})}}, 1}});
  const auto hit = combined_attack(net, wide, x0, 0.2, spec, cfg);
  CHECK(hit.fgsm_flipped);
  CHECK(hit.fgsm_bypassed);
  CHECK(hit.result.success);
  CHECK(hit.result.evaluations == 0);
  CHECK(hit.final_label == 1);

  // Tiny class-1 box away from the FGSM point: the search has to move there.
  Monitor narrow(0, 0.0, 1, {ClassAbstraction{1, {Box{vec({0.25, 0.7}), vec({0.3, 0.75})}}, 1}});
  spec.epsilon = 0.2;
  const auto searched = combined_attack(net, narrow, x0, 0.2, spec, cfg);
  CHECK(searched.fgsm_flipped);
  CHECK_FALSE(searched.fgsm_bypassed);
  REQUIRE(searched.result.success);
  CHECK(searched.result.evaluations > 0);
  CHECK(verdict(narrow, net, *searched.result.x_adv).accepted);
  CHECK(net.predict(*searched.result.x_adv) != 0);
  CHECK(*searched.result.norm_achieved == doctest::Approx((*searched.result.x_adv - x0).lpNorm<1>()));

  // eps_f = 0 leaves the label unchanged.
  const auto none = combined_attack(net, wide, x0, 0.0, spec, cfg);
  CHECK_FALSE(none.fgsm_flipped);
  CHECK_FALSE(none.result.applicable);
  CHECK_FALSE(none.result.success);

  AttackSpec wrong = spec;
  wrong.preserve_prediction = true;
  CHECK_THROWS_AS(combined_attack(net, wide, x0, 0.2, wrong, cfg), ArgumentError);
}

TEST_CASE("invalid_to_valid with label stability keeps the start label") {
  const auto inst = xor_instance();
  AttackSpec spec;
  spec.kind = AttackKind::invalid_to_valid;
  spec.epsilon = 0.5;
  SolverConfig cfg;
  cfg.budget = 5000;
  std::mt19937_64 rng(4);
  std::size_t done = 0;
  while (done < 5) {
    const Vector x0 = uniform_vector(2, rng, 0, 1);
    const AttackProblem p(spec, x0, inst.net, inst.mon);
    if (!p.starting_condition_holds()) continue;
    ++done;
    const auto r = run_attack(p, cfg);
    if (r.success) {
      CHECK(inst.net.predict(*r.x_adv) == inst.net.predict(x0));
      CHECK(verdict(inst.mon, inst.net, *r.x_adv).accepted);
    }
  }
}

TEST_CASE("AttackSpec validation and names") {
  AttackSpec s;
  s.epsilon = -1;
  CHECK_THROWS_AS(s.validate(), ArgumentError);
  s = {};
  s.penalty_monitor = 0;
  CHECK_THROWS_AS(s.validate(), ArgumentError);
  CHECK(attack_kind_from_string("v2i") == AttackKind::valid_to_invalid);
  CHECK(norm_from_string("l2") == Norm::L2);
  CHECK_THROWS_AS(norm_from_string("Linf"), ArgumentError);
}
