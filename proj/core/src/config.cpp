#include "boxmon/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "boxmon/errors.hpp"
#include "boxmon/text_io.hpp"

namespace boxmon {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw ArgumentError("config key '" + key + "': " + why + " (got '" + value + "')");
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "expected a number");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "expected a non-negative integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "expected true/false");
}

std::set<ClassLabel> parse_classes(const std::string& key, const std::string& v) {
  std::set<ClassLabel> out;
  for (const auto& item : split_list(v)) out.insert(static_cast<ClassLabel>(parse_uint(key, item)));
  if (out.empty()) bad_value(key, v, "expected a non-empty class list");
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(v)) out.push_back(static_cast<std::size_t>(parse_uint(key, item)));
  return out;
}

DatasetKind dataset_from_string(const std::string& key, const std::string& v) {
  if (v == "xor") return DatasetKind::xor_corners;
  if (v == "rings") return DatasetKind::rings;
  if (v == "mnist") return DatasetKind::mnist;
  bad_value(key, v, "expected xor, rings or mnist");
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source_name) {
  ConfigFile cfg;
  std::string line, section;
  std::size_t lineno = 0;
  bool saw_version = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source_name + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw FormatError(where + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw FormatError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw FormatError(where + ": empty key");
    if (!saw_version) {
      if (!section.empty() || key != "version") throw FormatError(where + ": first entry must be 'version = 1'");
      if (value != "1") throw FormatError(where + ": unsupported config version " + value);
      saw_version = true;
      continue;
    }
    cfg.entries_[section.empty() ? key : section + "." + key] = value;
  }
  if (!saw_version) throw FormatError(source_name + ": missing 'version = 1'");
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path.string());
  return parse(in, path.string());
}

void ConfigFile::set(const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) throw ArgumentError("empty config key");
  entries_[dotted_key] = value;
}

void ConfigFile::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ArgumentError("override must look like section.key=value: " + assignment);
  set(trim(std::string_view(assignment).substr(0, eq)), trim(std::string_view(assignment).substr(eq + 1)));
}

std::optional<std::string> ConfigFile::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

const char* to_string(DatasetKind d) {
  switch (d) {
    case DatasetKind::xor_corners:
      return "xor";
    case DatasetKind::rings:
      return "rings";
    case DatasetKind::mnist:
      return "mnist";
  }
  return "?";
}

std::map<std::string, NetworkSpec> default_networks() {
  std::map<std::string, NetworkSpec> nets;
  TrainConfig toy;
  toy.epochs = 200;
  toy.batch_size = 16;
  toy.learning_rate = 0.1;
  toy.hidden_dims = {8};
  TrainConfig mnist;
  mnist.epochs = 5;
  mnist.batch_size = 32;
  mnist.learning_rate = 0.05;
  mnist.hidden_dims = {100};

  nets["xor"] = {"xor", DatasetKind::xor_corners, {0, 1}, toy, 0.5, 400};
  nets["playground"] = {"playground", DatasetKind::rings, {0, 1}, toy, 0.5, 400};
  nets["mnist2"] = {"mnist2", DatasetKind::mnist, {0, 1}, mnist, 0.3, 0};
  nets["mnist3"] = {"mnist3", DatasetKind::mnist, {0, 1, 2}, mnist, 0.3, 0};
  nets["mnist10"] = {"mnist10", DatasetKind::mnist, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, mnist, 0.3, 0};
  return nets;
}

const NetworkSpec& ExperimentConfig::network(const std::string& name) const {
  auto it = networks.find(name);
  if (it == networks.end()) throw ArgumentError("unknown network '" + name + "'");
  return it->second;
}

void ExperimentConfig::validate() const {
  if (sample_count < 1 || adv_eval_samples < 1 || combined_samples < 1)
    throw ArgumentError("sample counts must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("test_fraction must lie in (0,1)");
  for (const auto& [name, n] : networks) {
    n.train.validate();
    if (n.known_classes.size() < 2) throw ArgumentError("network " + name + " needs at least two known classes");
    if (!(n.epsilon >= 0.0)) throw ArgumentError("network " + name + ": epsilon must be >= 0");
  }
  for (const auto& n : sweep_networks) (void)network(n);
  (void)network(adversarial_network);
  (void)network(projection_network);
  if (monitor.clusters_per_class < 1) throw ArgumentError("monitor.clusters must be >= 1");
  if (!(monitor.tolerance >= 0.0)) throw ArgumentError("monitor.tolerance must be >= 0");
  attack.validate();
  if (!(fgsm_epsilon >= 0.0)) throw ArgumentError("attack.fgsm_epsilon must be >= 0");
  if (cluster_grid.empty() || tolerance_grid.empty()) throw ArgumentError("adv_eval grids must be non-empty");
  for (auto k : cluster_grid)
    if (k < 1) throw ArgumentError("adv_eval.clusters entries must be >= 1");
  for (auto t : tolerance_grid)
    if (!(t >= 0.0)) throw ArgumentError("adv_eval.tolerances entries must be >= 0");
}

ExperimentConfig make_experiment_config(const ConfigFile& file) {
  ExperimentConfig cfg;
  cfg.networks = default_networks();

  for (const auto& [key, v] : file.entries()) {
    if (key == "experiment.master_seed") cfg.master_seed = parse_uint(key, v);
    else if (key == "experiment.output_dir") cfg.output_dir = v;
    else if (key == "experiment.sample_count") cfg.sample_count = parse_uint(key, v);
    else if (key == "adv_eval.samples") cfg.adv_eval_samples = parse_uint(key, v);
    else if (key == "combined.samples") cfg.combined_samples = parse_uint(key, v);
    else if (key == "combined.budget") cfg.combined_budget = parse_uint(key, v);
    else if (key == "experiment.record_elapsed") cfg.record_elapsed = parse_bool(key, v);
    else if (key == "data.mnist_dir") cfg.mnist_dir = v;
    else if (key == "data.test_fraction") cfg.test_fraction = parse_real(key, v);
    else if (key == "monitor.layer") {
      if (v == "auto") cfg.monitor.watched_layer.reset();
      else cfg.monitor.watched_layer = parse_uint(key, v);
    }
    else if (key == "monitor.clusters") cfg.monitor.clusters_per_class = parse_uint(key, v);
    else if (key == "monitor.tolerance") cfg.monitor.tolerance = parse_real(key, v);
    else if (key == "attack.kinds") {
      cfg.kinds.clear();
      for (const auto& s : split_list(v)) cfg.kinds.push_back(attack_kind_from_string(s));
    }
    else if (key == "attack.norms") {
      cfg.norms.clear();
      for (const auto& s : split_list(v)) cfg.norms.push_back(norm_from_string(s));
    }
    else if (key == "attack.penalty_monitor") cfg.attack.penalty_monitor = parse_real(key, v);
    else if (key == "attack.penalty_pred") cfg.attack.penalty_pred = parse_real(key, v);
    else if (key == "attack.violation_offset") cfg.attack.violation_offset = parse_real(key, v);
    else if (key == "attack.fgsm_epsilon") cfg.fgsm_epsilon = parse_real(key, v);
    else if (key == "solver.methods") {
      cfg.solvers.clear();
      for (const auto& s : split_list(v)) cfg.solvers.push_back(solver_from_string(s));
    }
    else if (key == "solver.budget") cfg.solver.budget = parse_uint(key, v);
    else if (key == "solver.de_population") cfg.solver.de_population = parse_uint(key, v);
    else if (key == "solver.de_weight") cfg.solver.de_weight = parse_real(key, v);
    else if (key == "solver.de_crossover") cfg.solver.de_crossover = parse_real(key, v);
    else if (key == "solver.nm_restarts") cfg.solver.nm_restarts = parse_uint(key, v);
    else if (key == "solver.stall_generations") cfg.solver.stall_generations = parse_uint(key, v);
    else if (key == "sweep.networks") cfg.sweep_networks = split_list(v);
    else if (key == "adversarial.network") cfg.adversarial_network = v;
    else if (key == "adv_eval.clusters") cfg.cluster_grid = parse_sizes(key, v);
    else if (key == "adv_eval.tolerances") {
      cfg.tolerance_grid.clear();
      for (const auto& s : split_list(v)) cfg.tolerance_grid.push_back(parse_real(key, s));
    }
    else if (key == "projection.network") cfg.projection_network = v;
    else if (key == "projection.dims") {
      if (v == "auto") {
        cfg.projection_dims.reset();
      } else {
        const auto dims = parse_sizes(key, v);
        if (dims.size() != 2 || dims[0] == dims[1]) bad_value(key, v, "expected two distinct indices");
        cfg.projection_dims = std::make_pair(dims[0], dims[1]);
      }
    }
    else if (key.rfind("network.", 0) == 0) {
      // network.<name>.<field>
      const auto dot = key.find('.', 8);
      if (dot == std::string::npos) bad_value(key, v, "expected network.<name>.<field>");
      const std::string name = key.substr(8, dot - 8);
      const std::string field = key.substr(dot + 1);
      auto [it, inserted] = cfg.networks.try_emplace(name);
      NetworkSpec& n = it->second;
      if (inserted) n.name = name;
      if (field == "dataset") n.dataset = dataset_from_string(key, v);
      else if (field == "classes") n.known_classes = parse_classes(key, v);
      else if (field == "hidden") n.train.hidden_dims = parse_sizes(key, v);
      else if (field == "epochs") n.train.epochs = parse_uint(key, v);
      else if (field == "batch_size") n.train.batch_size = parse_uint(key, v);
      else if (field == "learning_rate") n.train.learning_rate = parse_real(key, v);
      else if (field == "epsilon") n.epsilon = parse_real(key, v);
      else if (field == "synth_samples") n.synth_samples = parse_uint(key, v);
      else throw ArgumentError("unknown config key '" + key + "'");
    }
    else throw ArgumentError("unknown config key '" + key + "'");
  }
  return cfg;
}

std::string network_fingerprint(const ExperimentConfig& cfg, const NetworkSpec& net) {
  std::ostringstream os;
  os << "name=" << net.name << ";dataset=" << to_string(net.dataset) << ";classes=";
  for (auto c : net.known_classes) os << c << ',';
  os << ";hidden=";
  for (auto h : net.train.hidden_dims) os << h << ',';
  os << ";epochs=" << net.train.epochs << ";batch=" << net.train.batch_size
     << ";lr=" << text_io::format_double(net.train.learning_rate) << ";synth=" << net.synth_samples
     << ";test_fraction=" << text_io::format_double(cfg.test_fraction) << ";master_seed=" << cfg.master_seed;
  return os.str();
}

}  // namespace boxmon
