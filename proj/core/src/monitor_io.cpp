#include <fstream>

#include "boxmon/errors.hpp"
#include "boxmon/monitor.hpp"
#include "boxmon/text_io.hpp"

namespace boxmon {

namespace {
constexpr int kMonitorVersion = 1;
constexpr long long kMaxCount = 1 << 20;

void write_row(std::ostream& out, const char* tag, const Vector& v) {
  out << tag;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << text_io::format_double(v[i]);
  out << '\n';
}
}  // namespace

// boxmon-monitor 1
// watched_layer <l>
// tolerance <tau>
// clusters_per_class <k>
// dim <d>
// classes <n>
// class <label> clusters_used <k_y> boxes <m>
// lo <d values>
// hi <d values>
void save_monitor(const Monitor& mon, std::ostream& out) {
  out << "boxmon-monitor " << kMonitorVersion << '\n';
  out << "watched_layer " << mon.watched_layer() << '\n';
  out << "tolerance " << text_io::format_double(mon.tolerance()) << '\n';
  out << "clusters_per_class " << mon.clusters_per_class() << '\n';
  out << "dim " << mon.dim() << '\n';
  out << "classes " << mon.abstractions().size() << '\n';
  for (const auto& a : mon.abstractions()) {
    out << "class " << a.class_id << " clusters_used " << a.clusters_used << " boxes " << a.boxes.size()
        << '\n';
    for (const auto& b : a.boxes) {
      write_row(out, "lo", b.lo);
      write_row(out, "hi", b.hi);
    }
  }
}

void save_monitor(const Monitor& mon, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_monitor(mon, out);
  if (!out) throw Error("write failed: " + path.string());
}

Monitor load_monitor(std::istream& in, const std::string& source_name) {
  text_io::TokenReader rd(in, source_name);
  rd.expect("boxmon-monitor");
  if (rd.integer() != kMonitorVersion) rd.fail("unsupported monitor version");
  rd.expect("watched_layer");
  const auto layer = static_cast<std::size_t>(rd.count(1024));
  rd.expect("tolerance");
  const double tau = rd.real();
  rd.expect("clusters_per_class");
  const auto k = static_cast<std::size_t>(rd.count(kMaxCount));
  rd.expect("dim");
  const auto dim = rd.count(kMaxCount);
  rd.expect("classes");
  const auto n_classes = rd.count(kMaxCount);
  std::vector<ClassAbstraction> abstractions;
  for (long long c = 0; c < n_classes; ++c) {
    ClassAbstraction a;
    rd.expect("class");
    a.class_id = static_cast<ClassLabel>(rd.integer());
    rd.expect("clusters_used");
    a.clusters_used = static_cast<std::size_t>(rd.count(kMaxCount));
    rd.expect("boxes");
    const auto n_boxes = rd.count(kMaxCount);
    for (long long b = 0; b < n_boxes; ++b) {
      Box box{Vector(dim), Vector(dim)};
      rd.expect("lo");
      for (long long i = 0; i < dim; ++i) box.lo[i] = rd.real();
      rd.expect("hi");
      for (long long i = 0; i < dim; ++i) box.hi[i] = rd.real();
      a.boxes.push_back(std::move(box));
    }
    abstractions.push_back(std::move(a));
  }
  try {
    return Monitor(layer, tau, k, std::move(abstractions));
  } catch (const Error& e) {
    rd.fail(e.what());
  }
}

Monitor load_monitor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open monitor file " + path.string());
  return load_monitor(in, path.string());
}

}  // namespace boxmon
