#pragma once

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace formation {

/// Undirected edge between two 0-based vertices, always stored with i < j.
struct Edge {
  int i = 0;
  int j = 0;

  friend bool operator==(const Edge &, const Edge &) = default;
  friend auto operator<=>(const Edge &, const Edge &) = default;
};

/// 1-based vertex pair as it appears in files and on the command line.
using LabelPair = std::pair<int, int>;

/// Simple undirected graph with a canonical (lexicographic) edge order.
///
/// Every matrix row and measurement entry in the library is indexed by the
/// position of an edge in this order.
class Graph {
public:
  Graph() = default;

  /// Builds a graph from 1-based vertex pairs. Pairs are canonicalized to
  /// i < j, sorted and deduplicated. Throws std::invalid_argument on a
  /// self-loop, an out-of-range vertex or n < 2.
  static Graph from_labels(int n, const std::vector<LabelPair> &pairs);

  int vertex_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge> &edges() const { return edges_; }
  const Edge &edge(std::size_t e) const { return edges_.at(e); }

  /// Row index of edge {i, j} (0-based vertices, either order).
  /// Throws std::out_of_range for a non-edge.
  std::size_t edge_index(int i, int j) const;
  bool has_edge(int i, int j) const;

  /// Same lookup with 1-based labels.
  std::size_t edge_index_labels(int a, int b) const {
    return edge_index(a - 1, b - 1);
  }

  /// Edge list with 1-based labels, in canonical order.
  std::vector<LabelPair> labels() const;

  /// Subgraph on the same vertex set keeping the listed edge rows.
  Graph subgraph(const std::vector<std::size_t> &rows) const;

  friend bool operator==(const Graph &, const Graph &) = default;

private:
  int n_ = 0;
  std::vector<Edge> edges_;
};

/// Assignment of a tail (the sensing, responsible agent) to every edge.
class Orientation {
public:
  Orientation() = default;

  /// `directed` holds 1-based (tail, head) pairs. Each edge of `graph` must
  /// be named exactly once.
  static Orientation from_labels(Graph graph,
                                 const std::vector<LabelPair> &directed);

  /// Orientation from explicit 0-based tails, one per canonical edge.
  static Orientation from_tails(Graph graph, std::vector<int> tails);

  const Graph &graph() const { return graph_; }
  int tail(std::size_t e) const { return tails_.at(e); }
  int head(std::size_t e) const;
  const std::vector<int> &tails() const { return tails_; }

  /// Rows of the out-edges of vertex v, in canonical order.
  std::vector<std::size_t> out_edges(int v) const;
  int out_degree(int v) const;

  /// Every edge flipped.
  Orientation reversed() const;

  /// 1-based (tail, head) pairs in canonical edge order.
  std::vector<LabelPair> labels() const;

  friend bool operator==(const Orientation &, const Orientation &) = default;

private:
  Graph graph_;
  std::vector<int> tails_;
};

/// n points in R^d stored as one stacked vector (p_1, ..., p_n).
class Configuration {
public:
  Configuration() = default;
  Configuration(int dim, Eigen::VectorXd coords);
  Configuration(int dim, std::initializer_list<double> coords);

  static Configuration from_points(const std::vector<std::vector<double>> &pts);

  int dim() const { return d_; }
  int size() const { return static_cast<int>(x_.size()) / d_; }

  const Eigen::VectorXd &coords() const { return x_; }
  Eigen::VectorXd &coords() { return x_; }

  auto point(int i) const { return x_.segment(i * d_, d_); }
  auto point(int i) { return x_.segment(i * d_, d_); }

  /// Largest pairwise distance.
  double diameter() const;

  std::vector<std::vector<double>> to_points() const;

  friend bool operator==(const Configuration &a, const Configuration &b) {
    return a.d_ == b.d_ && a.x_ == b.x_;
  }

private:
  int d_ = 1;
  Eigen::VectorXd x_;
};

/// Squared edge lengths in canonical edge order.
struct Measurement {
  Eigen::VectorXd values;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double operator[](std::size_t e) const {
    return values(static_cast<Eigen::Index>(e));
  }
};

/// Throws std::invalid_argument unless p has the graph's vertex count.
void require_compatible(const Graph &graph, const Configuration &p);

} // namespace formation
