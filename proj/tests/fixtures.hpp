#pragma once

#include "formation/graph.hpp"

namespace formation::test {

inline Graph triangle() { return Graph::from_labels(3, {{1, 2}, {1, 3}, {2, 3}}); }

inline Graph four_cycle() {
  return Graph::from_labels(4, {{1, 2}, {2, 3}, {3, 4}, {1, 4}});
}

inline Graph wheel5() {
  return Graph::from_labels(
      5, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {3, 4}, {4, 5}, {2, 5}});
}

inline Orientation wheel5_directed() {
  return Orientation::from_labels(wheel5(), {{2, 3},
                                             {3, 4},
                                             {4, 5},
                                             {5, 2},
                                             {1, 2},
                                             {1, 3},
                                             {4, 1},
                                             {5, 1}});
}

inline Orientation triangle_cyclic() {
  return Orientation::from_labels(triangle(), {{1, 2}, {2, 3}, {3, 1}});
}

inline Configuration wheel5_target() {
  return Configuration::from_points(
      {{0.0, 0.0}, {-0.5, -0.5}, {-1.0, 1.0}, {2.0 / 3.0, 1.0}, {1.0, -1.0}});
}

inline Configuration wheel5_bad_target() {
  return Configuration::from_points({{9.0 / 5.0, -5.0 / 3.0},
                                     {-0.5, -0.5},
                                     {-1.0, 1.0},
                                     {2.0 / 3.0, 1.0},
                                     {1.0, -1.0}});
}

inline Orientation fig4_directed() {
  std::vector<LabelPair> arcs{{2, 1}, {3, 1}, {3, 5}, {4, 2}, {4, 3}, {5, 1},
                              {5, 6}, {6, 2}, {6, 4}, {3, 2}, {5, 2}};
  std::vector<LabelPair> undirected(arcs.begin(), arcs.end());
  return Orientation::from_labels(Graph::from_labels(6, undirected), arcs);
}

inline Configuration fig4_target() {
  return Configuration::from_points({{0.11, -1.03},
                                     {-0.91, -0.11},
                                     {1.44, 1.64},
                                     {0.35, -1.99},
                                     {-1.87, 1.53},
                                     {1.61, 0.77}});
}

inline Configuration unit_square() {
  return Configuration::from_points({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

} // namespace formation::test
