#include "boxmon/attack.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "boxmon/errors.hpp"

namespace boxmon {

namespace {
// Gap charged when the predicted class has no boxes at all.
constexpr double kMissingAbstractionGap = 1e3;
}  // namespace

const char* to_string(AttackKind k) {
  return k == AttackKind::valid_to_invalid ? "valid_to_invalid" : "invalid_to_valid";
}

const char* to_string(Norm n) { return n == Norm::L1 ? "L1" : "L2"; }

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "valid_to_invalid" || s == "v2i") return AttackKind::valid_to_invalid;
  if (s == "invalid_to_valid" || s == "i2v") return AttackKind::invalid_to_valid;
  throw ArgumentError("unknown attack kind '" + s + "'");
}

Norm norm_from_string(const std::string& s) {
  if (s == "L1" || s == "l1") return Norm::L1;
  if (s == "L2" || s == "l2") return Norm::L2;
  throw ArgumentError("unknown norm '" + s + "'");
}

double perturbation_norm(Norm n, const Vector& delta) {
  return n == Norm::L1 ? delta.lpNorm<1>() : delta.norm();
}

NormSummary summarize_norms(const Vector& delta) {
  return {delta.lpNorm<1>(), delta.norm(), delta.size() ? delta.lpNorm<Eigen::Infinity>() : 0.0};
}

void AttackSpec::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ArgumentError("epsilon must be a finite value >= 0");
  if (!(penalty_monitor > 0.0) || !(penalty_pred > 0.0)) throw ArgumentError("penalty weights must be > 0");
  if (!(violation_offset >= 0.0)) throw ArgumentError("violation_offset must be >= 0");
}

bool EpigraphL1::feasible() const {
  return (upper_residual.array() >= 0.0).all() && (lower_residual.array() >= 0.0).all();
}

EpigraphL1 epigraph_l1(const Vector& x, const Vector& x0, const Vector& z) {
  if (x.size() != x0.size() || z.size() != x.size()) throw ShapeError("epigraph_l1: length mismatch");
  const Vector d = x - x0;
  return {z, z - d, z + d};
}

EpigraphL1 epigraph_l1(const Vector& x, const Vector& x0) {
  if (x.size() != x0.size()) throw ShapeError("epigraph_l1: length mismatch");
  return epigraph_l1(x, x0, (x - x0).cwiseAbs());
}

AttackProblem::AttackProblem(AttackSpec spec, Vector x0, const DenseNetwork& net, const Monitor& mon)
    : spec_(spec), x0_(std::move(x0)), net_(net), mon_(mon) {
  spec_.validate();
  mon_.check_compatible(net_);
  if (spec_.preserve_prediction) {
    constraint_ = LabelConstraint::keep;
    reference_ = net_.predict(x0_);
  }
}

AttackProblem::AttackProblem(AttackSpec spec, Vector x0, const DenseNetwork& net, const Monitor& mon,
                             LabelConstraint constraint, ClassLabel reference)
    : spec_(spec), x0_(std::move(x0)), net_(net), mon_(mon), constraint_(constraint), reference_(reference) {
  spec_.validate();
  mon_.check_compatible(net_);
  if (constraint_ != LabelConstraint::none && !net_.knows(reference_))
    throw UnknownClassError("reference label " + std::to_string(reference_) + " unknown to network");
}

AttackProblem::Eval AttackProblem::evaluate(const Vector& x) const {
  Eval e;
  e.logits = net_.logits_and_layer(x, mon_.watched_layer(), e.watched);
  e.predicted = argmax(e.logits);
  e.accepted = mon_.accepts(net_.class_labels()[e.predicted], e.watched);
  return e;
}

bool AttackProblem::starting_condition_holds() const {
  const Eval e = evaluate(x0_);
  return spec_.kind == AttackKind::valid_to_invalid ? e.accepted : !e.accepted;
}

double AttackProblem::monitor_term(const Eval& e) const {
  const ClassAbstraction* abs = mon_.find(net_.class_labels()[e.predicted]);
  if (spec_.kind == AttackKind::valid_to_invalid) {
    if (!e.accepted) return 0.0;
    return spec_.violation_offset + outside_depth(*abs, e.watched, mon_.tolerance());
  }
  if (e.accepted) return 0.0;
  const double gap = abs && !abs->boxes.empty() ? inside_gap(*abs, e.watched, mon_.tolerance())
                                                 : kMissingAbstractionGap;
  return spec_.violation_offset + gap;
}

bool AttackProblem::label_ok(std::size_t predicted) const {
  switch (constraint_) {
    case LabelConstraint::none:
      return true;
    case LabelConstraint::keep:
      return net_.class_labels()[predicted] == reference_;
    case LabelConstraint::avoid:
      return net_.class_labels()[predicted] != reference_;
  }
  return true;
}

double AttackProblem::label_term(const Eval& e) const {
  if (constraint_ == LabelConstraint::none) return 0.0;
  const auto r = static_cast<Eigen::Index>(net_.class_index(reference_));
  double other = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < e.logits.size(); ++j)
    if (j != r) other = std::max(other, e.logits[j]);
  const double margin = std::isfinite(other) ? e.logits[r] - other : 0.0;
  // keep: margin >= 0 required; avoid: margin <= 0 required.
  const double hinge = constraint_ == LabelConstraint::keep ? std::max(0.0, -margin) : std::max(0.0, margin);
  return hinge + (label_ok(e.predicted) ? 0.0 : spec_.violation_offset);
}

double AttackProblem::monitor_surrogate(const Vector& x) const { return monitor_term(evaluate(x)); }

double AttackProblem::label_surrogate(const Vector& x) const { return label_term(evaluate(x)); }

double AttackProblem::objective(const Vector& x) const {
  const Eval e = evaluate(x);
  return distance(x) + spec_.penalty_monitor * monitor_term(e) + spec_.penalty_pred * label_term(e);
}

bool AttackProblem::success(const Vector& x) const {
  const Verdict v = verdict(mon_, net_, x);
  const bool monitor_ok = spec_.kind == AttackKind::valid_to_invalid ? !v.accepted : v.accepted;
  return monitor_ok && label_ok(net_.class_index(v.predicted));
}

AttackResult run_attack(const AttackProblem& problem, const SolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  AttackResult out;
  auto stamp = [&] {
    out.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  if (!problem.starting_condition_holds()) {
    out.applicable = false;
    stamp();
    return out;
  }
  const SearchBounds bounds = problem.bounds();
  cfg.validate(bounds.dim());
  const ObjectiveFn f = [&](const Vector& x) { return problem.objective(x); };

  SolverResult sr;
  const Vector step = Vector::Constant(problem.start().size(), 0.05 * problem.spec().epsilon);
  switch (cfg.method) {
    case SolverMethod::differential_evolution:
      sr = solve_de(f, bounds, cfg, [&](const Vector& x) { return problem.success(x); });
      break;
    case SolverMethod::nelder_mead:
      sr = solve_nelder_mead(f, bounds, cfg, problem.start(), step);
      break;
    case SolverMethod::multistart_nm:
      sr = solve_multistart_nm(f, bounds, cfg, problem.start(), step);
      break;
  }
  out.evaluations = sr.evaluations;
  out.best_objective = sr.value;
  if (sr.best.size() == problem.start().size() && bounds.holds(sr.best) && problem.success(sr.best)) {
    out.success = true;
    out.norm_achieved = problem.distance(sr.best);
    out.norms = summarize_norms(sr.best - problem.start());
    out.x_adv = std::move(sr.best);
  }
  stamp();
  return out;
}

AttackResult attack(const AttackSpec& spec, const SolverConfig& cfg, const Vector& x0, const DenseNetwork& net,
                    const Monitor& mon) {
  return run_attack(AttackProblem(spec, x0, net, mon), cfg);
}

Vector fgsm(const DenseNetwork& net, const Vector& x0, double eps) {
  const Vector g = net.input_gradient(x0, net.predict(x0));
  Vector x = x0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
    x[i] = std::clamp(x0[i] + eps * s, 0.0, 1.0);
  }
  return x;
}

CombinedResult combined_attack(const DenseNetwork& net, const Monitor& mon, const Vector& x0, double fgsm_eps,
                               const AttackSpec& spec, const SolverConfig& cfg) {
  if (spec.kind != AttackKind::invalid_to_valid || spec.preserve_prediction)
    throw ArgumentError("combined attack needs kind=invalid_to_valid without prediction preservation");
  const auto t0 = std::chrono::steady_clock::now();
  CombinedResult out;
  out.original_label = net.predict(x0);
  const Vector x1 = fgsm(net, x0, fgsm_eps);
  const Verdict v1 = verdict(mon, net, x1);
  out.fgsm_flipped = v1.predicted != out.original_label;

  auto finish = [&](const Vector& x) {
    out.result.success = true;
    out.result.x_adv = x;
    out.result.norm_achieved = perturbation_norm(spec.norm, x - x0);
    out.result.norms = summarize_norms(x - x0);
    out.final_label = net.predict(x);
  };

  if (!out.fgsm_flipped) {
    out.result.applicable = false;
  } else if (v1.accepted) {
    out.fgsm_bypassed = true;
    finish(x1);
  } else {
    const AttackProblem problem(spec, x1, net, mon, LabelConstraint::avoid, out.original_label);
    AttackResult r = run_attack(problem, cfg);
    out.result.evaluations = r.evaluations;
    out.result.best_objective = r.best_objective;
    if (r.success) finish(*r.x_adv);
  }
  out.result.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace boxmon
