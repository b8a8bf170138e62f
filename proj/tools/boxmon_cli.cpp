// boxmon: command-line front end for the experiment harness.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "boxmon/config.hpp"
#include "boxmon/errors.hpp"
#include "boxmon/experiments.hpp"
#include "boxmon/model_io.hpp"
#include "boxmon/text_io.hpp"

using namespace boxmon;
using text_io::format_double;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> output_dir;
  std::optional<std::string> mnist_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> clusters;
  std::optional<double> tolerance;
  std::optional<std::string> layer;
  bool quiet = false;
  bool record_elapsed = false;

  std::vector<std::string> networks;
  std::string network;
  std::string kind = "valid_to_invalid";
  std::string norm = "L1";
  std::string solver = "de";
  std::optional<std::string> dims;
};

ExperimentConfig resolve(const Options& o) {
  ConfigFile file = o.config_path.empty() ? ConfigFile{} : ConfigFile::load(o.config_path);
  // Precedence: built-in defaults < config file < env < --set < dedicated flags.
  if (const char* env = std::getenv("BOXMON_OUTPUT_DIR"); env && *env) file.set("experiment.output_dir", env);
  for (const auto& a : o.overrides) file.set_assignment(a);
  if (o.output_dir) file.set("experiment.output_dir", *o.output_dir);
  if (o.mnist_dir) file.set("data.mnist_dir", *o.mnist_dir);
  if (o.seed) file.set("experiment.master_seed", std::to_string(*o.seed));
  if (o.samples) file.set("experiment.sample_count", std::to_string(*o.samples));
  if (o.budget) file.set("solver.budget", std::to_string(*o.budget));
  if (o.clusters) file.set("monitor.clusters", std::to_string(*o.clusters));
  if (o.tolerance) file.set("monitor.tolerance", format_double(*o.tolerance));
  if (o.layer) file.set("monitor.layer", *o.layer);
  if (o.record_elapsed) file.set("experiment.record_elapsed", "true");
  if (o.dims) file.set("projection.dims", *o.dims);
  return make_experiment_config(file);
}

void print_rows(const std::vector<AttackRow>& rows) {
  std::size_t ok = 0, applicable = 0;
  for (const auto& r : rows) {
    applicable += r.result.applicable;
    ok += r.result.success;
  }
  std::cout << "attacks: " << rows.size() << " applicable: " << applicable << " successes: " << ok << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Box-abstraction novelty monitor: training, monitoring and attack experiments"};
  app.require_subcommand(1);
  Options o;
  app.add_option("-c,--config", o.config_path, "Experiment config file (key = value with [sections])")
      ->check(CLI::ExistingFile);
  app.add_option("--set", o.overrides, "Override a config key, e.g. --set solver.budget=5000");
  app.add_option("-o,--output-dir", o.output_dir, "Output directory (env BOXMON_OUTPUT_DIR)");
  app.add_option("--mnist-dir", o.mnist_dir, "Directory holding the MNIST IDX training files");
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--samples", o.samples, "Attack starts per batch");
  app.add_option("--budget", o.budget, "Objective evaluation budget per attack");
  app.add_option("--clusters", o.clusters, "Clusters per class (k)");
  app.add_option("--tolerance", o.tolerance, "Box tolerance factor (tau)");
  app.add_option("--layer", o.layer, "Watched layer index or 'auto'");
  app.add_flag("--record-elapsed", o.record_elapsed, "Write wall times into CSVs (breaks byte-identical reruns)");
  app.add_flag("-q,--quiet", o.quiet, "No progress messages");

  auto* train = app.add_subcommand("train", "Train networks (or reuse cached models) and write metrics");
  train->add_option("networks", o.networks, "Network names (default: all configured)");

  auto* mon = app.add_subcommand("monitor-build", "Build and save a monitor, report rejection rates");
  mon->add_option("-n,--network", o.network, "Network name")->required();

  auto* atk = app.add_subcommand("attack", "Run one attack batch");
  atk->add_option("-n,--network", o.network, "Network name")->required();
  atk->add_option("--kind", o.kind, "valid_to_invalid (v2i) or invalid_to_valid (i2v)");
  atk->add_option("--norm", o.norm, "L1 or L2");
  atk->add_option("--solver", o.solver, "de, nm or msnm");

  auto* sweep = app.add_subcommand("solver-sweep", "Success counts per network x problem x solver");
  auto* adv = app.add_subcommand("adv-eval", "FGSM flips accepted by monitors over the k x tau grid");
  auto* comb = app.add_subcommand("combined", "FGSM followed by an invalid_to_valid DE search");
  auto* proj = app.add_subcommand("export-projection", "2-D watched-layer scatter before and after attack");
  proj->add_option("-n,--network", o.network, "Network name (default from config)");
  proj->add_option("--dims", o.dims, "Two watched-layer indices 'i,j' or 'auto'");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = resolve(o);
    if (*proj && !o.network.empty()) cfg.projection_network = o.network;
    Workspace ws(cfg, o.quiet ? nullptr : &std::cerr);

    if (*train) {
      std::vector<std::string> names = o.networks;
      if (names.empty())
        for (const auto& [name, spec] : ws.config().networks) names.push_back(name);
      for (const auto* p : cmd_train(ws, names))
        std::cout << p->spec.name << ": train accuracy " << format_double(p->train_accuracy) << ", test accuracy "
                  << format_double(p->test_accuracy) << '\n';
    } else if (*mon) {
      const Monitor m = cmd_monitor_build(ws, o.network);
      std::size_t boxes = 0;
      for (const auto& a : m.abstractions()) boxes += a.boxes.size();
      std::cout << "monitor: layer " << m.watched_layer() << ", " << m.abstractions().size() << " classes, " << boxes
                << " boxes\n";
    } else if (*atk) {
      print_rows(cmd_attack(ws, o.network, attack_kind_from_string(o.kind), norm_from_string(o.norm),
                            solver_from_string(o.solver)));
    } else if (*sweep) {
      std::size_t total_de = 0, total_nm = 0;
      for (const auto& c : cmd_solver_sweep(ws)) {
        std::cout << c.network << ' ' << to_string(c.kind) << ' ' << to_string(c.norm) << ' ' << to_string(c.solver)
                  << ": " << c.successes << '/' << c.attempted << '\n';
        if (c.solver == SolverMethod::differential_evolution) total_de += c.successes;
        if (c.solver == SolverMethod::nelder_mead) total_nm += c.successes;
      }
      std::cout << "total successes: de " << total_de << ", nm " << total_nm << '\n';
    } else if (*adv) {
      for (const auto& c : cmd_adv_eval(ws))
        std::cout << "k=" << c.clusters << " tau=" << format_double(c.tolerance) << ": " << c.flipped << '/'
                  << c.samples << " flipped, " << c.accepted << " accepted\n";
    } else if (*comb) {
      const CombinedSummary s = cmd_combined(ws);
      std::cout << "combined: " << s.successes << '/' << s.flipped << " flipped samples succeeded ("
                << s.bypassed_by_fgsm << " by FGSM alone), rate " << format_double(s.success_rate()) << '\n';
    } else if (*proj) {
      const auto [before, after] = cmd_export_projection(ws);
      std::cout << "projection dims " << before.dim_u << ',' << before.dim_v << ": " << before.points.size()
                << " points, " << before.boxes.size() << " boxes\n";
    }
    std::cout << "output: " << ws.config().output_dir.string() << '\n';
  } catch (const boxmon::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
