#include "formation/rigidity.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace formation {

Measurement distance_map(const Graph &graph, const Configuration &p) {
  require_compatible(graph, p);
  Measurement m{Eigen::VectorXd(static_cast<Eigen::Index>(graph.edge_count()))};
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const auto &ed = graph.edge(e);
    m.values(static_cast<Eigen::Index>(e)) =
        (p.point(ed.j) - p.point(ed.i)).squaredNorm();
  }
  return m;
}

Eigen::MatrixXd rigidity_matrix(const Graph &graph, const Configuration &p) {
  require_compatible(graph, p);
  const int d = p.dim();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(graph.edge_count()), p.coords().size());
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const auto &ed = graph.edge(e);
    const auto row = static_cast<Eigen::Index>(e);
    const Eigen::VectorXd diff = p.point(ed.i) - p.point(ed.j);
    r.block(row, ed.i * d, 1, d) = diff.transpose();
    r.block(row, ed.j * d, 1, d) = -diff.transpose();
  }
  return r;
}

Eigen::MatrixXd directed_rigidity_matrix(const Orientation &orientation,
                                         const Configuration &p) {
  Eigen::MatrixXd r = rigidity_matrix(orientation.graph(), p);
  const int d = p.dim();
  for (std::size_t e = 0; e < orientation.graph().edge_count(); ++e)
    r.block(static_cast<Eigen::Index>(e), orientation.head(e) * d, 1, d)
        .setZero();
  return r;
}

Eigen::VectorXd RankRevealingSvd::solve(const Eigen::VectorXd &x) const {
  if (rank == 0)
    return Eigen::VectorXd::Zero(right.rows());
  return right * (left.transpose() * x).cwiseQuotient(sigma);
}

RankRevealingSvd rank_revealing_svd(const Eigen::MatrixXd &m) {
  RankRevealingSvd out;
  if (m.size() == 0) {
    out.left = Eigen::MatrixXd::Zero(m.rows(), 0);
    out.right = Eigen::MatrixXd::Zero(m.cols(), 0);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU |
                                               Eigen::ComputeThinV);
  const Eigen::VectorXd &s = svd.singularValues();
  const double cutoff = s(0) * static_cast<double>(std::max(m.rows(), m.cols())) *
                        kRankCutoff;
  int r = 0;
  while (r < s.size() && s(r) > cutoff && s(r) > 0.0)
    ++r;
  out.rank = r;
  out.sigma = s.head(r);
  out.left = svd.matrixU().leftCols(r);
  out.right = svd.matrixV().leftCols(r);
  return out;
}

int numerical_rank(const Eigen::MatrixXd &m) {
  return rank_revealing_svd(m).rank;
}

int generic_rank(const Graph &graph, int d, std::uint64_t seed) {
  Rng rng(seed);
  int best = 0;
  for (int k = 0; k < kGenericRankSamples; ++k) {
    auto p = random_configuration(graph.vertex_count(), d, rng);
    best = std::max(best, numerical_rank(rigidity_matrix(graph, p)));
  }
  return best;
}

int cached_generic_rank(const Graph &graph, int d, std::uint64_t seed) {
  using Key = std::tuple<int, std::vector<Edge>, int, std::uint64_t>;
  static std::mutex mutex;
  static std::map<Key, int> cache;
  Key key{graph.vertex_count(), graph.edges(), d, seed};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end())
      return it->second;
  }
  const int rank = generic_rank(graph, d, seed);
  std::lock_guard lock(mutex);
  cache.emplace(std::move(key), rank);
  return rank;
}

int rigid_rank(int n, int d) {
  if (n >= d + 1)
    return d * n - d * (d + 1) / 2;
  return n * (n - 1) / 2;
}

bool is_generically_rigid(const Graph &graph, int d, std::uint64_t seed) {
  return cached_generic_rank(graph, d, seed) ==
         rigid_rank(graph.vertex_count(), d);
}

bool is_regular_point(const Graph &graph, const Configuration &p,
                      std::uint64_t seed) {
  return numerical_rank(rigidity_matrix(graph, p)) ==
         cached_generic_rank(graph, p.dim(), seed);
}

TangentBasis tangent_basis(const Graph &graph, const Configuration &p) {
  auto svd = rank_revealing_svd(rigidity_matrix(graph, p));
  if (svd.rank == 0)
    throw std::domain_error("rigidity matrix is zero; tangent space is empty");
  return {std::move(svd.left), svd.rank};
}

Eigen::MatrixXd projector(const Graph &graph, const Configuration &p) {
  const auto tb = tangent_basis(graph, p);
  return tb.basis * tb.basis.transpose();
}

Lift min_norm_lift(const Graph &graph, const Configuration &p,
                   const Eigen::VectorXd &v) {
  if (v.size() != static_cast<Eigen::Index>(graph.edge_count()))
    throw std::invalid_argument("edge velocity has the wrong length");
  const auto svd = rank_revealing_svd(rigidity_matrix(graph, p));
  Lift lift;
  const Eigen::VectorXd tangent = svd.left * (svd.left.transpose() * v);
  lift.residual = (v - tangent).norm();
  lift.projected = lift.residual > kLiftResidualTolerance;
  // R^+ already annihilates Im(R)^perp, so lifting v and lifting Pi v agree.
  lift.u = 0.5 * svd.solve(tangent);
  return lift;
}

Eigen::MatrixXd rigid_motion_basis(const Configuration &p) {
  const int d = p.dim();
  const int n = p.size();
  if (d < 1 || d > 3)
    throw std::invalid_argument("rigid motions supported for d in {1,2,3}");
  const int rot = d * (d - 1) / 2;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p.coords().size(), d + rot);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k)
      b(i * d + k, k) = 1.0;
  // one rotation generator per coordinate plane (a, c): x_a' = -x_c, x_c' = x_a
  int col = d;
  for (int a = 0; a < d; ++a) {
    for (int c = a + 1; c < d; ++c, ++col) {
      for (int i = 0; i < n; ++i) {
        b(i * d + a, col) = -p.point(i)(c);
        b(i * d + c, col) = p.point(i)(a);
      }
    }
  }
  return b;
}

CongruenceResult congruence_check(const Configuration &p,
                                  const Configuration &q, double tol) {
  if (p.size() != q.size() || p.dim() != q.dim())
    throw std::invalid_argument("congruence check needs equal n and d");
  const int n = p.size();
  const int d = p.dim();
  Eigen::MatrixXd x(n, d), y(n, d);
  for (int i = 0; i < n; ++i) {
    x.row(i) = q.point(i).transpose();
    y.row(i) = p.point(i).transpose();
  }
  x.rowwise() -= x.colwise().mean();
  y.rowwise() -= y.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x.transpose() * y,
                                        Eigen::ComputeFullU |
                                            Eigen::ComputeFullV);
  const Eigen::MatrixXd rotation = svd.matrixU() * svd.matrixV().transpose();
  const Eigen::MatrixXd aligned = x * rotation;
  CongruenceResult out;
  out.displacement = (aligned - y).rowwise().norm().maxCoeff();
  out.congruent = out.displacement < tol;
  return out;
}

} // namespace formation
