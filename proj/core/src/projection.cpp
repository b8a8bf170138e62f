#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "boxmon/errors.hpp"
#include "boxmon/experiments.hpp"
#include "boxmon/text_io.hpp"

namespace boxmon {

namespace fs = std::filesystem;
using text_io::format_double;

std::pair<std::size_t, std::size_t> highest_variance_dims(const std::vector<Vector>& points) {
  if (points.empty()) throw ArgumentError("highest_variance_dims: no points");
  const auto d = points.front().size();
  if (d < 2) throw ArgumentError("highest_variance_dims: need at least two dimensions");
  Vector mean = Vector::Zero(d), sq = Vector::Zero(d);
  for (const auto& p : points) {
    mean += p;
    sq += p.cwiseProduct(p);
  }
  const double n = static_cast<double>(points.size());
  mean /= n;
  const Vector var = sq / n - mean.cwiseProduct(mean);
  std::vector<std::size_t> idx(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Stable: equal variances keep the lower index first.
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return var[static_cast<Eigen::Index>(a)] > var[static_cast<Eigen::Index>(b)];
  });
  return {idx[0], idx[1]};
}

ProjectionExport project(const Monitor& mon, std::size_t du, std::size_t dv,
                         const std::vector<std::pair<std::string, Vector>>& watched_points) {
  ProjectionExport p;
  p.dim_u = du;
  p.dim_v = dv;
  const auto u = static_cast<Eigen::Index>(du), v = static_cast<Eigen::Index>(dv);
  for (const auto& [category, w] : watched_points) {
    if (w.size() <= std::max(u, v)) throw ShapeError("project: watched vector too short");
    p.points.push_back({category, w[u], w[v]});
  }
  for (const auto& abs : mon.abstractions())
    for (const auto& box : abs.boxes) {
      const EnlargedBounds b = enlarge(box, mon.tolerance());
      p.boxes.push_back({abs.class_id, b.lo[u], b.hi[u], b.lo[v], b.hi[v]});
    }
  return p;
}

void write_projection_csv(const ProjectionExport& p, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "row,category,dim_u,dim_v,u,v,u_hi,v_hi\n";
  for (const auto& pt : p.points)
    out << "point," << pt.category << ',' << p.dim_u << ',' << p.dim_v << ',' << format_double(pt.u) << ','
        << format_double(pt.v) << ",,\n";
  for (const auto& b : p.boxes)
    out << "box,class-" << b.label << ',' << p.dim_u << ',' << p.dim_v << ',' << format_double(b.u_lo) << ','
        << format_double(b.v_lo) << ',' << format_double(b.u_hi) << ',' << format_double(b.v_hi) << '\n';
}

namespace {

const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#17becf",
                                 "#bcbd22", "#7f7f7f", "#e377c2", "#393b79", "#637939"};
  return colors[i % (sizeof colors / sizeof *colors)];
}

}  // namespace

void write_projection_svg(const ProjectionExport& p, const std::string& title, const fs::path& path) {
  double u0 = 0, u1 = 1, v0 = 0, v1 = 1;
  bool first = true;
  auto grow = [&](double u, double v) {
    if (!std::isfinite(u) || !std::isfinite(v)) return;
    if (first) {
      u0 = u1 = u;
      v0 = v1 = v;
      first = false;
    }
    u0 = std::min(u0, u), u1 = std::max(u1, u), v0 = std::min(v0, v), v1 = std::max(v1, v);
  };
  for (const auto& pt : p.points) grow(pt.u, pt.v);
  for (const auto& b : p.boxes) grow(b.u_lo, b.v_lo), grow(b.u_hi, b.v_hi);
  if (u1 - u0 <= 0) u1 = u0 + 1;
  if (v1 - v0 <= 0) v1 = v0 + 1;

  constexpr double size = 560, pad = 40;
  auto X = [&](double u) { return pad + (u - u0) / (u1 - u0) * size; };
  auto Y = [&](double v) { return pad + size - (v - v0) / (v1 - v0) * size; };
  auto num = [](double x) { return format_double(std::round(x * 100) / 100); };

  std::map<std::string, const char*> colors;
  std::size_t next = 0;
  for (const auto& pt : p.points) {
    if (colors.count(pt.category)) continue;
    if (pt.category == "novel")
      colors[pt.category] = "#d62728";
    else if (pt.category == "post-attack")
      colors[pt.category] = "#ff7f0e";
    else
      colors[pt.category] = palette(next++);
  }

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const double w = size + 2 * pad;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w + 160) << "\" height=\"" << num(w)
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(pad) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
      << " (dims " << p.dim_u << ", " << p.dim_v << ")</text>\n";
  for (const auto& b : p.boxes)
    out << "<rect x=\"" << num(X(b.u_lo)) << "\" y=\"" << num(Y(b.v_hi)) << "\" width=\""
        << num(X(b.u_hi) - X(b.u_lo)) << "\" height=\"" << num(Y(b.v_lo) - Y(b.v_hi))
        << "\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"4 2\"/>\n";
  for (const auto& pt : p.points) {
    if (!std::isfinite(pt.u) || !std::isfinite(pt.v)) continue;
    const bool star = pt.category == "novel";
    out << "<circle cx=\"" << num(X(pt.u)) << "\" cy=\"" << num(Y(pt.v)) << "\" r=\"" << (star ? 4 : 2)
        << "\" fill=\"" << colors[pt.category] << "\" fill-opacity=\"0.7\"/>\n";
  }
  double ly = pad + 10;
  for (const auto& [cat, color] : colors) {
    out << "<circle cx=\"" << num(w + 10) << "\" cy=\"" << num(ly) << "\" r=\"4\" fill=\"" << color << "\"/>"
        << "<text x=\"" << num(w + 20) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << cat << "</text>\n";
    ly += 18;
  }
  out << "</svg>\n";
}

}  // namespace boxmon
