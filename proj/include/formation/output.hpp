#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "formation/graph.hpp"
#include "formation/simulation.hpp"

namespace formation {

/// Shortest round-trip decimal form of a double.
std::string format_number(double x);

/// Header: t, p<i>_x, p<i>_y, [p<i>_z,] m_<a>_<b> per edge, edge_err, speed,
/// energy. Labels are 1-based.
std::vector<std::string> trajectory_columns(const Graph &graph, int dim);

void write_trajectory_csv(std::ostream &out, const Graph &graph,
                          const Trajectory &traj);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  bool equal_aspect = false; // for node paths in the plane
  std::size_t max_points = 2000;
};

/// Static SVG line chart. Series longer than max_points are thinned by a
/// fixed stride; the last point is always kept.
void write_svg_plot(std::ostream &out, const std::vector<Series> &series,
                    const PlotOptions &opts);

/// Writes <prefix>_edges.svg, <prefix>_error.svg, <prefix>_energy.svg and,
/// for d >= 2, <prefix>_nodes.svg. Returns the paths written.
std::vector<std::filesystem::path>
write_trajectory_plots(const std::string &prefix, const Graph &graph,
                       const Trajectory &traj);

} // namespace formation
