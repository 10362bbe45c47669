#include "formation/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace formation {

namespace {

std::string pair_text(int a, int b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

} // namespace

Graph Graph::from_labels(int n, const std::vector<LabelPair> &pairs) {
  if (n < 2)
    throw std::invalid_argument("graph needs at least 2 vertices, got " +
                                std::to_string(n));
  Graph g;
  g.n_ = n;
  g.edges_.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    if (a < 1 || a > n || b < 1 || b > n)
      throw std::invalid_argument("edge " + pair_text(a, b) +
                                  " references a vertex outside 1.." +
                                  std::to_string(n));
    if (a == b)
      throw std::invalid_argument("self-loop " + pair_text(a, b));
    g.edges_.push_back({std::min(a, b) - 1, std::max(a, b) - 1});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()),
                 g.edges_.end());
  return g;
}

std::size_t Graph::edge_index(int i, int j) const {
  const Edge key{std::min(i, j), std::max(i, j)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key)
    throw std::out_of_range("not an edge: " + pair_text(i + 1, j + 1));
  return static_cast<std::size_t>(it - edges_.begin());
}

bool Graph::has_edge(int i, int j) const {
  const Edge key{std::min(i, j), std::max(i, j)};
  return std::binary_search(edges_.begin(), edges_.end(), key);
}

std::vector<LabelPair> Graph::labels() const {
  std::vector<LabelPair> out;
  out.reserve(edges_.size());
  for (const auto &e : edges_)
    out.emplace_back(e.i + 1, e.j + 1);
  return out;
}

Graph Graph::subgraph(const std::vector<std::size_t> &rows) const {
  Graph g;
  g.n_ = n_;
  for (auto r : rows)
    g.edges_.push_back(edges_.at(r));
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()),
                 g.edges_.end());
  return g;
}

Orientation Orientation::from_labels(Graph graph,
                                     const std::vector<LabelPair> &directed) {
  std::vector<int> tails(graph.edge_count(), -1);
  for (auto [a, b] : directed) {
    if (a < 1 || b < 1 || a > graph.vertex_count() ||
        b > graph.vertex_count() || !graph.has_edge(a - 1, b - 1))
      throw std::invalid_argument("directed pair " + pair_text(a, b) +
                                  " is not an edge of the graph");
    auto e = graph.edge_index(a - 1, b - 1);
    if (tails[e] != -1)
      throw std::invalid_argument("edge {" + std::to_string(std::min(a, b)) +
                                  "," + std::to_string(std::max(a, b)) +
                                  "} oriented twice");
    tails[e] = a - 1;
  }
  for (std::size_t e = 0; e < tails.size(); ++e) {
    if (tails[e] == -1) {
      const auto &ed = graph.edge(e);
      throw std::invalid_argument("edge {" + std::to_string(ed.i + 1) + "," +
                                  std::to_string(ed.j + 1) +
                                  "} left unoriented");
    }
  }
  Orientation o;
  o.graph_ = std::move(graph);
  o.tails_ = std::move(tails);
  return o;
}

Orientation Orientation::from_tails(Graph graph, std::vector<int> tails) {
  if (tails.size() != graph.edge_count())
    throw std::invalid_argument("orientation needs one tail per edge");
  for (std::size_t e = 0; e < tails.size(); ++e) {
    const auto &ed = graph.edge(e);
    if (tails[e] != ed.i && tails[e] != ed.j)
      throw std::invalid_argument("tail is not an endpoint of its edge");
  }
  Orientation o;
  o.graph_ = std::move(graph);
  o.tails_ = std::move(tails);
  return o;
}

int Orientation::head(std::size_t e) const {
  const auto &ed = graph_.edge(e);
  return tails_.at(e) == ed.i ? ed.j : ed.i;
}

std::vector<std::size_t> Orientation::out_edges(int v) const {
  std::vector<std::size_t> rows;
  for (std::size_t e = 0; e < tails_.size(); ++e)
    if (tails_[e] == v)
      rows.push_back(e);
  return rows;
}

int Orientation::out_degree(int v) const {
  return static_cast<int>(std::count(tails_.begin(), tails_.end(), v));
}

Orientation Orientation::reversed() const {
  Orientation o = *this;
  for (std::size_t e = 0; e < tails_.size(); ++e)
    o.tails_[e] = head(e);
  return o;
}

std::vector<LabelPair> Orientation::labels() const {
  std::vector<LabelPair> out;
  out.reserve(tails_.size());
  for (std::size_t e = 0; e < tails_.size(); ++e)
    out.emplace_back(tail(e) + 1, head(e) + 1);
  return out;
}

Configuration::Configuration(int dim, Eigen::VectorXd coords)
    : d_(dim), x_(std::move(coords)) {
  if (d_ < 1)
    throw std::invalid_argument("dimension must be positive");
  if (x_.size() % d_ != 0)
    throw std::invalid_argument("coordinate count is not a multiple of d");
  if (x_.size() / d_ < 2)
    throw std::invalid_argument("configuration needs at least 2 points");
}

Configuration::Configuration(int dim, std::initializer_list<double> coords)
    : Configuration(dim, Eigen::Map<const Eigen::VectorXd>(
                             coords.begin(),
                             static_cast<Eigen::Index>(coords.size()))) {}

Configuration
Configuration::from_points(const std::vector<std::vector<double>> &pts) {
  if (pts.empty())
    throw std::invalid_argument("configuration needs at least 2 points");
  const auto d = static_cast<int>(pts.front().size());
  Eigen::VectorXd x(static_cast<Eigen::Index>(pts.size()) * d);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (static_cast<int>(pts[i].size()) != d)
      throw std::invalid_argument("point " + std::to_string(i + 1) +
                                  " has dimension " +
                                  std::to_string(pts[i].size()) +
                                  ", expected " + std::to_string(d));
    for (int k = 0; k < d; ++k)
      x(static_cast<Eigen::Index>(i) * d + k) = pts[i][k];
  }
  return Configuration(d, std::move(x));
}

double Configuration::diameter() const {
  double best = 0.0;
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j)
      best = std::max(best, (point(i) - point(j)).norm());
  return best;
}

std::vector<std::vector<double>> Configuration::to_points() const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(size()));
  for (int i = 0; i < size(); ++i)
    for (int k = 0; k < d_; ++k)
      out[i].push_back(x_(i * d_ + k));
  return out;
}

void require_compatible(const Graph &graph, const Configuration &p) {
  if (p.size() != graph.vertex_count())
    throw std::invalid_argument(
        "configuration has " + std::to_string(p.size()) +
        " points but the graph has " + std::to_string(graph.vertex_count()) +
        " vertices");
}

} // namespace formation
