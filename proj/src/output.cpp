#include "formation/output.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace formation {

std::string format_number(double x) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{})
    throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

std::vector<std::string> trajectory_columns(const Graph &graph, int dim) {
  static constexpr std::array<const char *, 3> axis{"x", "y", "z"};
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("trajectory columns support d = 1, 2, 3");
  std::vector<std::string> cols{"t"};
  for (int v = 1; v <= graph.vertex_count(); ++v)
    for (int k = 0; k < dim; ++k)
      cols.push_back("p" + std::to_string(v) + "_" + axis[static_cast<std::size_t>(k)]);
  for (const auto &[a, b] : graph.labels())
    cols.push_back("m_" + std::to_string(a) + "_" + std::to_string(b));
  cols.insert(cols.end(), {"edge_err", "speed", "energy"});
  return cols;
}

void write_trajectory_csv(std::ostream &out, const Graph &graph,
                          const Trajectory &traj) {
  const auto cols = trajectory_columns(graph, traj.dim);
  for (std::size_t c = 0; c < cols.size(); ++c)
    out << (c ? "," : "") << cols[c];
  out << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_number(traj.times[k]);
    for (Eigen::Index c = 0; c < traj.positions[k].size(); ++c)
      out << ',' << format_number(traj.positions[k](c));
    for (Eigen::Index c = 0; c < traj.measurements[k].size(); ++c)
      out << ',' << format_number(traj.measurements[k](c));
    out << ',' << format_number(traj.edge_error[k]) << ','
        << format_number(traj.speed[k]) << ',' << format_number(traj.energy[k])
        << '\n';
  }
}

namespace {

constexpr std::array<const char *, 10> kPalette{
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void settle() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

} // namespace

void write_svg_plot(std::ostream &out, const std::vector<Series> &series,
                    const PlotOptions &opts) {
  const double width = 720, height = 480;
  const double left = 80, right = 150, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;

  const auto ty = [&](double y) {
    return opts.log_y ? (y > 0.0 ? std::log10(y) : std::nan("")) : y;
  };
  Range xr, yr;
  for (const auto &s : series) {
    for (double x : s.x)
      xr.add(x);
    for (double y : s.y)
      yr.add(ty(y));
  }
  xr.settle();
  yr.settle();
  if (opts.equal_aspect) {
    const double sx = (xr.hi - xr.lo) / pw, sy = (yr.hi - yr.lo) / ph;
    const double s = std::max(sx, sy);
    const double cx = 0.5 * (xr.lo + xr.hi), cy = 0.5 * (yr.lo + yr.hi);
    xr = {cx - 0.5 * s * pw, cx + 0.5 * s * pw};
    yr = {cy - 0.5 * s * ph, cy + 0.5 * s * ph};
  }
  const auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape(opts.title)
      << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    const double fx = xr.lo + (xr.hi - xr.lo) * k / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * k / 4.0;
    out << "<text x=\"" << fixed(px(fx)) << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << tick(fx) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << (opts.log_y ? "1e" + tick(fy) : tick(fy)) << "</text>\n";
    out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\""
        << fixed(py(fy)) << "\" y2=\"" << fixed(py(fy))
        << "\" stroke=\"#dddddd\"/>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << escape(opts.x_label) << "</text>\n";
  out << "<text transform=\"translate(18," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << escape(opts.y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto &ser = series[s];
    const char *colour = kPalette[s % kPalette.size()];
    const std::size_t n = std::min(ser.x.size(), ser.y.size());
    const std::size_t stride =
        n > opts.max_points ? (n + opts.max_points - 1) / opts.max_points : 1;
    out << "<polyline fill=\"none\" stroke=\"" << colour
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < n; k += stride) {
      const double y = ty(ser.y[k]);
      if (!std::isfinite(y))
        continue;
      out << (first ? "" : " ") << fixed(px(ser.x[k])) << ',' << fixed(py(y));
      first = false;
      if (k + stride >= n && k != n - 1 && std::isfinite(ty(ser.y[n - 1])))
        out << ' ' << fixed(px(ser.x[n - 1])) << ',' << fixed(py(ty(ser.y[n - 1])));
    }
    out << "\"/>\n";
    const double ly = top + 14 + 16.0 * static_cast<double>(s);
    out << "<line x1=\"" << left + pw + 10 << "\" x2=\"" << left + pw + 30
        << "\" y1=\"" << ly - 4 << "\" y2=\"" << ly - 4 << "\" stroke=\""
        << colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << escape(ser.label) << "</text>\n";
  }
  out << "</svg>\n";
}

std::vector<std::filesystem::path>
write_trajectory_plots(const std::string &prefix, const Graph &graph,
                       const Trajectory &traj) {
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string &suffix, const std::vector<Series> &s,
                        const PlotOptions &o) {
    std::filesystem::path path = prefix + "_" + suffix + ".svg";
    std::ofstream f(path, std::ios::binary);
    if (!f)
      throw std::runtime_error("cannot write " + path.string());
    write_svg_plot(f, s, o);
    written.push_back(path);
  };

  const auto labels = graph.labels();
  std::vector<Series> edges;
  for (std::size_t e = 0; e < labels.size(); ++e) {
    Series s{"m_" + std::to_string(labels[e].first) + "_" +
                 std::to_string(labels[e].second),
             traj.times,
             {}};
    for (const auto &m : traj.measurements)
      s.y.push_back(m(static_cast<Eigen::Index>(e)));
    edges.push_back(std::move(s));
  }
  emit("edges", edges, {"squared edge lengths", "t", "m_e", false, false, 2000});
  emit("error", {{"|m* - m|", traj.times, traj.edge_error}},
       {"edge error", "t", "|m* - m|", true, false, 2000});
  emit("energy", {{"energy", traj.times, traj.energy}},
       {"control energy", "t", "integral of |u|^2", false, false, 2000});

  if (traj.dim >= 2) {
    std::vector<Series> paths;
    for (int v = 0; v < graph.vertex_count(); ++v) {
      Series s{"agent " + std::to_string(v + 1), {}, {}};
      for (const auto &x : traj.positions) {
        s.x.push_back(x(v * traj.dim));
        s.y.push_back(x(v * traj.dim + 1));
      }
      paths.push_back(std::move(s));
    }
    emit("nodes", paths, {"agent paths", "x", "y", false, true, 2000});
  }
  return written;
}

} // namespace formation
