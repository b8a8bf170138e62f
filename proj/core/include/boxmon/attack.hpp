#pragma once

#include <optional>
#include <string>

#include "boxmon/monitor.hpp"
#include "boxmon/nn.hpp"
#include "boxmon/solvers.hpp"

namespace boxmon {

enum class AttackKind {
  valid_to_invalid,  // accepted input -> rejected
  invalid_to_valid,  // rejected input -> accepted
};

enum class Norm { L1, L2 };

const char* to_string(AttackKind k);
const char* to_string(Norm n);
AttackKind attack_kind_from_string(const std::string& s);
Norm norm_from_string(const std::string& s);

double perturbation_norm(Norm n, const Vector& delta);

struct AttackSpec {
  AttackKind kind = AttackKind::valid_to_invalid;
  Norm norm = Norm::L1;
  /// Per-coordinate search radius around the starting point.
  double epsilon = 0.3;
  /// Require predict(x) == predict(x0).
  bool preserve_prediction = true;
  double penalty_monitor = 1e3;
  double penalty_pred = 1e3;
  /// Constant added to a surrogate whenever its exact constraint is violated.
  /// 0 gives the bare hinge/depth surrogates; the default makes every
  /// infeasible point cost at least min(penalty) more than any feasible one.
  double violation_offset = 1.0;

  void validate() const;
};

/// Constraint on the label of the candidate relative to a reference label.
enum class LabelConstraint {
  none,
  keep,   // predict(x) == reference
  avoid,  // predict(x) != reference
};

/// Extended L1 variables of the epigraph form: z and the residuals
/// z - (x - x0) >= 0 and z + (x - x0) >= 0.
struct EpigraphL1 {
  Vector z;
  Vector upper_residual;  // z - (x - x0)
  Vector lower_residual;  // z + (x - x0)

  [[nodiscard]] bool feasible() const;
  [[nodiscard]] double objective() const { return z.sum(); }
};

/// Residuals for a given z.
EpigraphL1 epigraph_l1(const Vector& x, const Vector& x0, const Vector& z);
/// The minimiser of sum(z) at fixed x: z = |x - x0|.
EpigraphL1 epigraph_l1(const Vector& x, const Vector& x0);

/// Scalar penalty form of one attack around a fixed starting point.
///
/// objective(x) = N(x - x0) + penalty_monitor * g_m(x) + penalty_pred * g_p(x)
///
/// g_m is the monitor surrogate of the class predicted at x: outside_depth
/// for valid_to_invalid, inside_gap for invalid_to_valid. g_p is the hinge on
/// the logit margin of the reference label. Each surrogate also carries
/// `violation_offset` whenever its exact constraint fails.
class AttackProblem {
 public:
  AttackProblem(AttackSpec spec, Vector x0, const DenseNetwork& net, const Monitor& mon);
  /// Explicit label constraint (used by the combined attack).
  AttackProblem(AttackSpec spec, Vector x0, const DenseNetwork& net, const Monitor& mon,
                LabelConstraint constraint, ClassLabel reference);

  [[nodiscard]] const AttackSpec& spec() const { return spec_; }
  [[nodiscard]] const Vector& start() const { return x0_; }
  [[nodiscard]] LabelConstraint label_constraint() const { return constraint_; }
  [[nodiscard]] ClassLabel reference_label() const { return reference_; }
  [[nodiscard]] SearchBounds bounds() const { return epsilon_box(x0_, spec_.epsilon); }

  /// x0 is accepted (valid_to_invalid) or rejected (invalid_to_valid).
  [[nodiscard]] bool starting_condition_holds() const;

  [[nodiscard]] double distance(const Vector& x) const { return perturbation_norm(spec_.norm, x - x0_); }
  [[nodiscard]] double monitor_surrogate(const Vector& x) const;
  [[nodiscard]] double label_surrogate(const Vector& x) const;
  [[nodiscard]] double objective(const Vector& x) const;

  /// Exact predicate on the live network and monitor; never uses surrogates.
  [[nodiscard]] bool success(const Vector& x) const;

 private:
  struct Eval {
    Vector logits;
    Vector watched;
    std::size_t predicted = 0;
    bool accepted = false;
  };
  [[nodiscard]] Eval evaluate(const Vector& x) const;
  [[nodiscard]] double monitor_term(const Eval& e) const;
  [[nodiscard]] double label_term(const Eval& e) const;
  [[nodiscard]] bool label_ok(std::size_t predicted) const;

  AttackSpec spec_;
  Vector x0_;
  const DenseNetwork& net_;
  const Monitor& mon_;
  LabelConstraint constraint_ = LabelConstraint::none;
  ClassLabel reference_ = 0;
};

/// Perturbation size of a result in all three norms.
struct NormSummary {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};
NormSummary summarize_norms(const Vector& delta);

struct AttackResult {
  /// False when the starting point does not meet the attack's precondition.
  bool applicable = true;
  bool success = false;
  std::optional<Vector> x_adv;
  /// Unpenalised distance in the attack's norm (set iff success).
  std::optional<double> norm_achieved;
  NormSummary norms;
  double best_objective = 0.0;
  std::size_t evaluations = 0;
  double elapsed_ms = 0.0;
};

/// Runs cfg's solver on the problem's objective and re-checks the exact
/// predicate at the returned point.
AttackResult run_attack(const AttackProblem& problem, const SolverConfig& cfg);

AttackResult attack(const AttackSpec& spec, const SolverConfig& cfg, const Vector& x0, const DenseNetwork& net,
                    const Monitor& mon);

/// x0 + eps * sign(d loss / d x) at the predicted label, clipped to [0,1].
Vector fgsm(const DenseNetwork& net, const Vector& x0, double eps);

struct CombinedResult {
  AttackResult result;  // norms measured from the original x0
  ClassLabel original_label = 0;
  std::optional<ClassLabel> final_label;
  bool fgsm_flipped = false;
  bool fgsm_bypassed = false;  // FGSM output already accepted: no search run
};

/// FGSM flip followed, if the monitor rejects the flipped point, by an
/// invalid_to_valid search around it that keeps the label away from the
/// original class. Not applicable when FGSM leaves the label unchanged.
CombinedResult combined_attack(const DenseNetwork& net, const Monitor& mon, const Vector& x0, double fgsm_eps,
                               const AttackSpec& spec, const SolverConfig& cfg);

}  // namespace boxmon
