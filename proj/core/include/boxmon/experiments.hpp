#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "boxmon/attack.hpp"
#include "boxmon/config.hpp"
#include "boxmon/data.hpp"
#include "boxmon/monitor.hpp"
#include "boxmon/nn.hpp"

namespace boxmon {

/// A trained network together with the data it was trained and tested on.
struct PreparedNetwork {
  NetworkSpec spec;
  ClassSplit split;
  DenseNetwork net;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  /// True when the model was read from the output directory instead of trained.
  bool from_cache = false;
};

/// One row of an attack batch.
struct AttackRow {
  std::string network;
  std::size_t sample_id = 0;
  AttackKind kind = AttackKind::valid_to_invalid;
  Norm norm = Norm::L1;
  SolverMethod solver = SolverMethod::differential_evolution;
  std::uint64_t seed = 0;
  AttackResult result;
};

struct SweepCell {
  std::string network;
  AttackKind kind = AttackKind::valid_to_invalid;
  Norm norm = Norm::L1;
  SolverMethod solver = SolverMethod::differential_evolution;
  std::size_t attempted = 0;
  std::size_t successes = 0;
};

struct AdvEvalCell {
  std::size_t clusters = 1;
  double tolerance = 0.0;
  std::size_t samples = 0;
  std::size_t flipped = 0;
  /// Flipped samples the monitor still accepted.
  std::size_t accepted = 0;
};

struct CombinedRow {
  std::size_t sample_id = 0;
  std::uint64_t seed = 0;
  CombinedResult outcome;
};

struct CombinedSummary {
  std::size_t considered = 0;
  std::size_t flipped = 0;
  std::size_t bypassed_by_fgsm = 0;
  std::size_t successes = 0;
  [[nodiscard]] double success_rate() const { return flipped ? double(successes) / double(flipped) : 0.0; }
};

/// A watched-layer point for the projection scatter.
struct ProjectedPoint {
  std::string category;  // valid-class-<label>, novel, post-attack
  double u = 0.0, v = 0.0;
};

struct ProjectedBox {
  ClassLabel label = 0;
  double u_lo = 0.0, u_hi = 0.0, v_lo = 0.0, v_hi = 0.0;
};

struct ProjectionExport {
  std::size_t dim_u = 0, dim_v = 1;
  std::vector<ProjectedPoint> points;
  std::vector<ProjectedBox> boxes;
};

/// Shared state of the harness commands: configuration, the MNIST corpus
/// (read at most once) and trained networks. Results go below
/// `config().output_dir`.
class Workspace {
 public:
  explicit Workspace(ExperimentConfig cfg, std::ostream* log = nullptr);

  [[nodiscard]] const ExperimentConfig& config() const { return cfg_; }
  [[nodiscard]] std::filesystem::path out(const std::string& relative) const;

  /// Trains the network or loads it from the model cache. A cached model is
  /// used only when its fingerprint file matches the current settings.
  const PreparedNetwork& network(const std::string& name);
  Monitor monitor(const std::string& name, std::size_t clusters, double tolerance);

  /// Inputs the attacks start from. Valid-to-invalid draws known test samples
  /// the monitor accepts; invalid-to-valid draws novel samples it rejects (for
  /// the 2-D toys, uniform points of the unit square).
  std::vector<std::pair<std::size_t, Vector>> attack_starts(const std::string& name, const Monitor& mon,
                                                            AttackKind kind, std::size_t count);

  std::uint64_t seed(const std::string& stream, std::uint64_t index = 0) const;
  void note(const std::string& msg) const;

 private:
  const Dataset& mnist();

  ExperimentConfig cfg_;
  std::ostream* log_;
  std::optional<Dataset> mnist_;
  std::map<std::string, std::unique_ptr<PreparedNetwork>> nets_;
};

// Commands. Each writes CSV files under the output directory and returns
// the in-memory result for callers that want to inspect it.

std::vector<PreparedNetwork const*> cmd_train(Workspace& ws, const std::vector<std::string>& names);
Monitor cmd_monitor_build(Workspace& ws, const std::string& name);
std::vector<AttackRow> cmd_attack(Workspace& ws, const std::string& name, AttackKind kind, Norm norm,
                                  SolverMethod solver);
std::vector<SweepCell> cmd_solver_sweep(Workspace& ws);
std::vector<AdvEvalCell> cmd_adv_eval(Workspace& ws);
CombinedSummary cmd_combined(Workspace& ws, std::vector<CombinedRow>* rows = nullptr);
/// Writes projection_before/after .csv and .svg; returns {before, after}.
std::pair<ProjectionExport, ProjectionExport> cmd_export_projection(Workspace& ws);

// CSV writers, exposed for tests.
void write_attack_csv(const std::vector<AttackRow>& rows, bool record_elapsed, const std::filesystem::path& path);
void write_sweep_csv(const std::vector<SweepCell>& cells, const std::filesystem::path& path);

// Projection helpers.
std::pair<std::size_t, std::size_t> highest_variance_dims(const std::vector<Vector>& points);
ProjectionExport project(const Monitor& mon, std::size_t du, std::size_t dv,
                         const std::vector<std::pair<std::string, Vector>>& watched_points);
void write_projection_csv(const ProjectionExport& p, const std::filesystem::path& path);
void write_projection_svg(const ProjectionExport& p, const std::string& title, const std::filesystem::path& path);

}  // namespace boxmon
