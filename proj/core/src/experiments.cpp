#include "boxmon/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "boxmon/errors.hpp"
#include "boxmon/model_io.hpp"
#include "boxmon/seeds.hpp"
#include "boxmon/text_io.hpp"
#include "boxmon/training.hpp"

namespace boxmon {

namespace fs = std::filesystem;
using text_io::format_double;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string opt_real(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string attack_stream(const std::string& net, AttackKind kind, Norm norm) {
  return "attack/" + net + "/" + to_string(kind) + "/" + to_string(norm);
}

// Random-order view of a dataset: index permutation seeded per stream.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

constexpr std::size_t kToyNovelDraws = 200000;

}  // namespace

Workspace::Workspace(ExperimentConfig cfg, std::ostream* log) : cfg_(std::move(cfg)), log_(log) {
  cfg_.validate();
}

fs::path Workspace::out(const std::string& relative) const { return cfg_.output_dir / relative; }

std::uint64_t Workspace::seed(const std::string& stream, std::uint64_t index) const {
  return derive_seed(cfg_.master_seed, stream, index);
}

void Workspace::note(const std::string& msg) const {
  if (log_) *log_ << msg << '\n' << std::flush;
}

const Dataset& Workspace::mnist() {
  if (!mnist_) {
    const fs::path images = cfg_.mnist_dir / "train-images-idx3-ubyte";
    const fs::path labels = cfg_.mnist_dir / "train-labels-idx1-ubyte";
    if (!fs::exists(images) || !fs::exists(labels))
      throw ArgumentError("MNIST files not found in " + cfg_.mnist_dir.string() +
                          " (expected train-images-idx3-ubyte and train-labels-idx1-ubyte)");
    note("loading MNIST from " + cfg_.mnist_dir.string());
    mnist_ = load_mnist_idx(images, labels);
  }
  return *mnist_;
}

const PreparedNetwork& Workspace::network(const std::string& name) {
  if (auto it = nets_.find(name); it != nets_.end()) return *it->second;
  NetworkSpec spec = cfg_.network(name);
  spec.train.seed = seed("train/" + name);
  ClassSplit split;

  const std::uint64_t split_seed = seed("split/" + name);
  switch (spec.dataset) {
    case DatasetKind::mnist:
      split = split_by_classes(mnist(), spec.known_classes, cfg_.test_fraction, split_seed);
      break;
    case DatasetKind::xor_corners:
    case DatasetKind::rings: {
      const std::uint64_t data_seed = seed("synth/" + name);
      Dataset ds = spec.dataset == DatasetKind::xor_corners ? synth_xor(spec.synth_samples, data_seed)
                                                           : synth_playground(spec.synth_samples, data_seed);
      split = split_by_classes(ds, spec.known_classes, cfg_.test_fraction, split_seed);
      break;
    }
  }

  const fs::path model_path = out("models/" + name + ".model");
  const fs::path print_path = out("models/" + name + ".fingerprint");
  const std::string fingerprint = network_fingerprint(cfg_, spec) + "\n";
  std::optional<DenseNetwork> net;
  if (fs::exists(model_path) && fs::exists(print_path) && read_file(print_path) == fingerprint) {
    try {
      net = load_model(model_path);
    } catch (const FormatError& e) {
      note("ignoring unreadable cached model: " + std::string(e.what()));
    }
  }
  const bool cached = net.has_value();
  if (cached) {
    note("using cached model " + model_path.string());
  } else {
    note("training " + name + " on " + std::to_string(split.train_known.size()) + " samples");
    std::vector<EpochStats> log;
    net = train(spec.train, split.train_known, &log);
    fs::create_directories(model_path.parent_path());
    fs::create_directories(out("logs"));
    save_model(*net, model_path);
    write_training_log(log, out("logs/" + name + "_training.csv"));
    open_out(print_path) << fingerprint;
  }
  auto p = std::make_unique<PreparedNetwork>(PreparedNetwork{std::move(spec), std::move(split), std::move(*net)});
  p->from_cache = cached;
  p->train_accuracy = evaluate_accuracy(p->net, p->split.train_known);
  p->test_accuracy = p->split.test_known.empty() ? 0.0 : evaluate_accuracy(p->net, p->split.test_known);
  return *nets_.emplace(name, std::move(p)).first->second;
}

Monitor Workspace::monitor(const std::string& name, std::size_t clusters, double tolerance) {
  const PreparedNetwork& p = network(name);
  MonitorParams params = cfg_.monitor;
  params.clusters_per_class = clusters;
  params.tolerance = tolerance;
  return build_monitor(p.net, p.split.train_known, params, seed("monitor/" + name, clusters));
}

std::vector<std::pair<std::size_t, Vector>> Workspace::attack_starts(const std::string& name, const Monitor& mon,
                                                                     AttackKind kind, std::size_t count) {
  const PreparedNetwork& p = network(name);
  std::vector<std::pair<std::size_t, Vector>> out;
  const bool want_accepted = kind == AttackKind::valid_to_invalid;
  const std::string stream = "starts/" + name + "/" + to_string(kind);

  if (!want_accepted && p.spec.dataset != DatasetKind::mnist) {
    // Toy inputs: anything in the unit square the monitor rejects is novel.
    std::mt19937_64 rng(seed(stream));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto dim = static_cast<Eigen::Index>(p.split.train_known.feature_dim);
    for (std::size_t draw = 0; draw < kToyNovelDraws && out.size() < count; ++draw) {
      Vector x(dim);
      for (Eigen::Index i = 0; i < dim; ++i) x[i] = u01(rng);
      if (!verdict(mon, p.net, x).accepted) out.emplace_back(draw, std::move(x));
    }
    return out;
  }

  const Dataset& pool = want_accepted ? p.split.test_known : p.split.test_novel;
  for (std::size_t i : shuffled_indices(pool.size(), seed(stream))) {
    if (out.size() >= count) break;
    if (verdict(mon, p.net, pool.samples[i]).accepted == want_accepted) out.emplace_back(i, pool.samples[i]);
  }
  return out;
}

void write_attack_csv(const std::vector<AttackRow>& rows, bool record_elapsed, const fs::path& path) {
  auto out = open_out(path);
  out << "network,sample_id,kind,norm,solver,seed,applicable,success,norm_achieved,l1,l2,linf,evaluations,"
         "elapsed_ms\n";
  for (const auto& r : rows) {
    const AttackResult& a = r.result;
    out << r.network << ',' << r.sample_id << ',' << to_string(r.kind) << ',' << to_string(r.norm) << ','
        << to_string(r.solver) << ',' << r.seed << ',' << int(a.applicable) << ',' << int(a.success) << ','
        << opt_real(a.norm_achieved) << ',';
    if (a.success)
      out << format_double(a.norms.l1) << ',' << format_double(a.norms.l2) << ',' << format_double(a.norms.linf);
    else
      out << ",,";
    out << ',' << a.evaluations << ',' << (record_elapsed ? format_double(a.elapsed_ms) : "na") << '\n';
  }
}

void write_sweep_csv(const std::vector<SweepCell>& cells, const fs::path& path) {
  auto out = open_out(path);
  out << "network,kind,norm,solver,attempted,successes\n";
  for (const auto& c : cells)
    out << c.network << ',' << to_string(c.kind) << ',' << to_string(c.norm) << ',' << to_string(c.solver) << ','
        << c.attempted << ',' << c.successes << '\n';
}

std::vector<PreparedNetwork const*> cmd_train(Workspace& ws, const std::vector<std::string>& names) {
  std::vector<PreparedNetwork const*> out;
  for (const auto& n : names) out.push_back(&ws.network(n));
  auto csv = open_out(ws.out("train_metrics.csv"));
  csv << "network,train_samples,test_samples,train_accuracy,test_accuracy\n";
  for (const auto* p : out)
    csv << p->spec.name << ',' << p->split.train_known.size() << ',' << p->split.test_known.size() << ','
        << format_double(p->train_accuracy) << ',' << format_double(p->test_accuracy) << '\n';
  return out;
}

Monitor cmd_monitor_build(Workspace& ws, const std::string& name) {
  const auto& mp = ws.config().monitor;
  Monitor mon = ws.monitor(name, mp.clusters_per_class, mp.tolerance);
  fs::create_directories(ws.out("monitors"));
  save_monitor(mon, ws.out("monitors/" + name + ".monitor"));

  const PreparedNetwork& p = ws.network(name);
  auto csv = open_out(ws.out("monitor_" + name + ".csv"));
  csv << "set,samples,rejected,rejection_rate\n";
  auto rate = [&](const char* label, const Dataset& ds) {
    if (ds.empty()) return;
    std::size_t rejected = 0;
    for (const auto& x : ds.samples) rejected += !verdict(mon, p.net, x).accepted;
    csv << label << ',' << ds.size() << ',' << rejected << ','
        << format_double(double(rejected) / double(ds.size())) << '\n';
  };
  rate("train_known", p.split.train_known);
  rate("test_known", p.split.test_known);
  rate("test_novel", p.split.test_novel);
  return mon;
}

namespace {

std::vector<AttackRow> run_batch(Workspace& ws, const std::string& name, const Monitor& mon, AttackKind kind,
                                 Norm norm, SolverMethod solver,
                                 const std::vector<std::pair<std::size_t, Vector>>& starts) {
  const PreparedNetwork& p = ws.network(name);
  AttackSpec spec = ws.config().attack;
  spec.kind = kind;
  spec.norm = norm;
  spec.epsilon = p.spec.epsilon;
  SolverConfig sc = ws.config().solver;
  sc.method = solver;
  std::vector<AttackRow> rows;
  for (const auto& [id, x0] : starts) {
    AttackRow r{name, id, kind, norm, solver, ws.seed(attack_stream(name, kind, norm), id), {}};
    sc.seed = r.seed;
    r.result = attack(spec, sc, x0, p.net, mon);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::vector<AttackRow> cmd_attack(Workspace& ws, const std::string& name, AttackKind kind, Norm norm,
                                  SolverMethod solver) {
  const auto& mp = ws.config().monitor;
  const Monitor mon = ws.monitor(name, mp.clusters_per_class, mp.tolerance);
  const auto starts = ws.attack_starts(name, mon, kind, ws.config().sample_count);
  auto rows = run_batch(ws, name, mon, kind, norm, solver, starts);
  write_attack_csv(rows, ws.config().record_elapsed,
                   ws.out("attack_" + name + "_" + to_string(kind) + "_" + to_string(norm) + "_" +
                          to_string(solver) + ".csv"));
  return rows;
}

std::vector<SweepCell> cmd_solver_sweep(Workspace& ws) {
  const auto& cfg = ws.config();
  std::vector<SweepCell> cells;
  std::vector<AttackRow> all;
  for (const auto& name : cfg.sweep_networks) {
    const Monitor mon = ws.monitor(name, cfg.monitor.clusters_per_class, cfg.monitor.tolerance);
    for (AttackKind kind : cfg.kinds) {
      const auto starts = ws.attack_starts(name, mon, kind, cfg.sample_count);
      for (Norm norm : cfg.norms)
        for (SolverMethod solver : cfg.solvers) {
          auto rows = run_batch(ws, name, mon, kind, norm, solver, starts);
          SweepCell c{name, kind, norm, solver, rows.size(), 0};
          for (const auto& r : rows) c.successes += r.result.success;
          ws.note(name + " " + to_string(kind) + " " + to_string(norm) + " " + to_string(solver) + ": " +
                  std::to_string(c.successes) + "/" + std::to_string(c.attempted));
          cells.push_back(c);
          all.insert(all.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
        }
    }
  }
  write_attack_csv(all, cfg.record_elapsed, ws.out("solver_sweep_attacks.csv"));
  write_sweep_csv(cells, ws.out("solver_sweep.csv"));
  return cells;
}

std::vector<AdvEvalCell> cmd_adv_eval(Workspace& ws) {
  const auto& cfg = ws.config();
  const std::string& name = cfg.adversarial_network;
  const PreparedNetwork& p = ws.network(name);
  const Dataset& pool = p.split.test_known;
  const auto order = shuffled_indices(pool.size(), ws.seed("adv_eval/samples/" + name));
  const std::size_t n = std::min(cfg.adv_eval_samples, order.size());

  std::vector<Vector> flips;
  for (std::size_t s = 0; s < n; ++s) {
    const Vector& x0 = pool.samples[order[s]];
    Vector x1 = fgsm(p.net, x0, cfg.fgsm_epsilon);
    if (p.net.predict(x1) != p.net.predict(x0)) flips.push_back(std::move(x1));
  }

  std::vector<AdvEvalCell> cells;
  for (std::size_t k : cfg.cluster_grid) {
    const Monitor base = ws.monitor(name, k, 0.0);
    for (double tau : cfg.tolerance_grid) {
      const Monitor mon = base.with_tolerance(tau);
      AdvEvalCell c{k, tau, n, flips.size(), 0};
      for (const auto& f : flips) c.accepted += verdict(mon, p.net, f).accepted;
      cells.push_back(c);
    }
  }
  auto csv = open_out(ws.out("adv_eval.csv"));
  csv << "clusters,tolerance,samples,flipped,accepted\n";
  for (const auto& c : cells)
    csv << c.clusters << ',' << format_double(c.tolerance) << ',' << c.samples << ',' << c.flipped << ','
        << c.accepted << '\n';
  return cells;
}

CombinedSummary cmd_combined(Workspace& ws, std::vector<CombinedRow>* rows_out) {
  const auto& cfg = ws.config();
  const std::string& name = cfg.adversarial_network;
  const PreparedNetwork& p = ws.network(name);
  const Monitor mon = ws.monitor(name, cfg.monitor.clusters_per_class, cfg.monitor.tolerance);

  AttackSpec spec = cfg.attack;
  spec.kind = AttackKind::invalid_to_valid;
  spec.norm = Norm::L1;
  spec.preserve_prediction = false;
  spec.epsilon = p.spec.epsilon;
  SolverConfig sc = cfg.solver;
  sc.method = SolverMethod::differential_evolution;
  sc.budget = cfg.combined_budget;

  const Dataset& pool = p.split.test_known;
  CombinedSummary sum;
  std::vector<CombinedRow> rows;
  for (std::size_t i : shuffled_indices(pool.size(), ws.seed("combined/samples/" + name))) {
    if (sum.flipped >= cfg.combined_samples) break;
    CombinedRow r{i, ws.seed("combined/" + name, i), {}};
    sc.seed = r.seed;
    r.outcome = combined_attack(p.net, mon, pool.samples[i], cfg.fgsm_epsilon, spec, sc);
    ++sum.considered;
    if (r.outcome.fgsm_flipped) {
      ++sum.flipped;
      sum.bypassed_by_fgsm += r.outcome.fgsm_bypassed;
      sum.successes += r.outcome.result.success;
    }
    rows.push_back(std::move(r));
  }

  auto csv = open_out(ws.out("combined_attacks.csv"));
  csv << "sample_id,seed,original_label,fgsm_flipped,fgsm_bypassed,success,final_label,l1,l2,linf,evaluations,"
         "elapsed_ms\n";
  for (const auto& r : rows) {
    const auto& o = r.outcome;
    csv << r.sample_id << ',' << r.seed << ',' << o.original_label << ',' << int(o.fgsm_flipped) << ','
        << int(o.fgsm_bypassed) << ',' << int(o.result.success) << ','
        << (o.final_label ? std::to_string(*o.final_label) : "") << ',';
    if (o.result.success)
      csv << format_double(o.result.norms.l1) << ',' << format_double(o.result.norms.l2) << ','
          << format_double(o.result.norms.linf);
    else
      csv << ",,";
    csv << ',' << o.result.evaluations << ','
        << (cfg.record_elapsed ? format_double(o.result.elapsed_ms) : "na") << '\n';
  }
  auto summary = open_out(ws.out("combined_summary.csv"));
  summary << "considered,flipped,bypassed_by_fgsm,successes,success_rate\n"
          << sum.considered << ',' << sum.flipped << ',' << sum.bypassed_by_fgsm << ',' << sum.successes << ','
          << format_double(sum.success_rate()) << '\n';
  if (rows_out) *rows_out = std::move(rows);
  return sum;
}

std::pair<ProjectionExport, ProjectionExport> cmd_export_projection(Workspace& ws) {
  const auto& cfg = ws.config();
  const std::string& name = cfg.projection_network;
  const PreparedNetwork& p = ws.network(name);
  const Monitor mon = ws.monitor(name, cfg.monitor.clusters_per_class, cfg.monitor.tolerance);
  const std::size_t layer = mon.watched_layer();
  auto watched = [&](const Vector& x) { return p.net.forward(x).per_layer[layer]; };

  // Training points per class, capped so the scatter stays readable.
  constexpr std::size_t kPerClass = 300;
  std::vector<std::pair<std::string, Vector>> base;
  std::vector<Vector> all_train;
  std::map<ClassLabel, std::size_t> taken;
  const Dataset& tr = p.split.train_known;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    Vector v = watched(tr.samples[i]);
    if (taken[tr.labels[i]] < kPerClass && p.net.predict(tr.samples[i]) == tr.labels[i]) {
      ++taken[tr.labels[i]];
      base.emplace_back("valid-class-" + std::to_string(tr.labels[i]), v);
    }
    all_train.push_back(std::move(v));
  }
  const auto dims = cfg.projection_dims ? *cfg.projection_dims : highest_variance_dims(all_train);
  if (dims.first >= mon.dim() || dims.second >= mon.dim())
    throw ArgumentError("projection dims out of range for a " + std::to_string(mon.dim()) + "-d watched layer");

  const auto starts = ws.attack_starts(name, mon, AttackKind::invalid_to_valid, cfg.sample_count);
  const auto rows = run_batch(ws, name, mon, AttackKind::invalid_to_valid, cfg.norms.front(),
                              SolverMethod::differential_evolution, starts);

  auto before_pts = base;
  auto after_pts = base;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    before_pts.emplace_back("novel", watched(starts[s].second));
    const AttackResult& r = rows[s].result;
    if (r.success)
      after_pts.emplace_back("post-attack", watched(*r.x_adv));
    else
      after_pts.emplace_back("novel", watched(starts[s].second));
  }
  ProjectionExport before = project(mon, dims.first, dims.second, before_pts);
  ProjectionExport after = project(mon, dims.first, dims.second, after_pts);
  write_projection_csv(before, ws.out("projection_before.csv"));
  write_projection_csv(after, ws.out("projection_after.csv"));
  write_projection_svg(before, name + " before attack", ws.out("projection_before.svg"));
  write_projection_svg(after, name + " after attack", ws.out("projection_after.svg"));
  write_attack_csv(rows, cfg.record_elapsed, ws.out("projection_attacks.csv"));
  return {std::move(before), std::move(after)};
}

}  // namespace boxmon
