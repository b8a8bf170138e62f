#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "boxmon/attack.hpp"
#include "boxmon/monitor.hpp"
#include "boxmon/solvers.hpp"
#include "boxmon/training.hpp"

namespace boxmon {

/// Flat `key = value` text with `[section]` headers and `#` comments. Keys are
/// stored as "section.key". The first non-comment line must be
/// `version = 1`.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& source_name = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  /// Applies a "section.key=value" override.
  void set(const std::string& dotted_key, const std::string& value);
  void set_assignment(const std::string& assignment);

  [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
  [[nodiscard]] const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

enum class DatasetKind { xor_corners, rings, mnist };

const char* to_string(DatasetKind d);

/// One monitored classifier: where its data comes from and how it is trained.
struct NetworkSpec {
  std::string name;
  DatasetKind dataset = DatasetKind::mnist;
  std::set<ClassLabel> known_classes;
  TrainConfig train;
  /// Attack search radius for this network's inputs.
  double epsilon = 0.3;
  std::size_t synth_samples = 400;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 2024;
  std::filesystem::path output_dir = "out";
  std::filesystem::path mnist_dir = "data/mnist";
  /// Attack starts per solver-sweep cell, single attack batch and projection.
  std::size_t sample_count = 20;
  /// Held-out samples FGSM is applied to in adv-eval.
  std::size_t adv_eval_samples = 100;
  /// FGSM-flipped samples the combined attack is run on.
  std::size_t combined_samples = 50;
  std::size_t combined_budget = 50000;
  double test_fraction = 1.0 / 6.0;
  /// Write measured wall time into result CSVs; off keeps reruns byte-identical.
  bool record_elapsed = false;

  std::map<std::string, NetworkSpec> networks;
  /// Networks visited by solver-sweep, in order.
  std::vector<std::string> sweep_networks{"xor", "playground", "mnist2", "mnist3"};
  /// Network used by adv-eval, combined and (by default) export-projection.
  std::string adversarial_network = "mnist10";
  std::string projection_network = "mnist2";

  MonitorParams monitor;

  std::vector<AttackKind> kinds{AttackKind::valid_to_invalid, AttackKind::invalid_to_valid};
  std::vector<Norm> norms{Norm::L1, Norm::L2};
  AttackSpec attack;  // kind/norm/epsilon are filled per run
  double fgsm_epsilon = 0.2;

  std::vector<SolverMethod> solvers{SolverMethod::differential_evolution, SolverMethod::nelder_mead,
                                    SolverMethod::multistart_nm};
  SolverConfig solver;  // method/seed are filled per run

  std::vector<std::size_t> cluster_grid{1, 2, 3};
  std::vector<double> tolerance_grid{0.0, 0.1, 0.25};

  std::optional<std::pair<std::size_t, std::size_t>> projection_dims;

  [[nodiscard]] const NetworkSpec& network(const std::string& name) const;
  void validate() const;
};

/// Built-in networks: xor, playground, mnist2 ({0,1}), mnist3 ({0,1,2}),
/// mnist10 (all digits).
std::map<std::string, NetworkSpec> default_networks();

/// Defaults overlaid with every recognised key of `file`; unknown keys are
/// rejected so typos do not pass silently.
ExperimentConfig make_experiment_config(const ConfigFile& file);

/// Canonical text of the settings that determine a trained network, used to
/// decide whether a cached model file can be reused.
std::string network_fingerprint(const ExperimentConfig& cfg, const NetworkSpec& net);

}  // namespace boxmon
