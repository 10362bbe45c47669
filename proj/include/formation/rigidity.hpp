#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "formation/graph.hpp"
#include "formation/random.hpp"

namespace formation {

/// Relative singular-value cutoff: sigma_k counts toward the rank when
/// sigma_k > sigma_max * max(rows, cols) * kRankCutoff.
inline constexpr double kRankCutoff = 1e-12;

/// Number of random configurations sampled when estimating generic rank.
inline constexpr int kGenericRankSamples = 3;

/// Residual above which min_norm_lift reports that it projected its input.
inline constexpr double kLiftResidualTolerance = 1e-8;

/// F(p): squared length of every edge, in canonical edge order.
Measurement distance_map(const Graph &graph, const Configuration &p);

/// R(p), |E| x dn. Row for edge {i,j} carries (p_i - p_j)^T in block i and
/// (p_j - p_i)^T in block j. Satisfies R(p) p = F(p) and dF_p = 2 R(p).
Eigen::MatrixXd rigidity_matrix(const Graph &graph, const Configuration &p);

/// R(p) with the head block of every oriented edge zeroed.
Eigen::MatrixXd directed_rigidity_matrix(const Orientation &orientation,
                                         const Configuration &p);

/// Thin SVD of a matrix truncated to its numerical rank.
struct RankRevealingSvd {
  Eigen::MatrixXd left;   // |rows| x rank, orthonormal, spans the image
  Eigen::VectorXd sigma;  // rank nonzero singular values, descending
  Eigen::MatrixXd right;  // |cols| x rank, orthonormal, spans the row space
  int rank = 0;

  /// Moore-Penrose pseudoinverse applied to x.
  Eigen::VectorXd solve(const Eigen::VectorXd &x) const;
};

RankRevealingSvd rank_revealing_svd(const Eigen::MatrixXd &m);

int numerical_rank(const Eigen::MatrixXd &m);

/// Maximum rank of R over kGenericRankSamples uniform random configurations
/// on [-1, 1]^{dn}. Deterministic per seed.
int generic_rank(const Graph &graph, int d, std::uint64_t seed = kDefaultSeed);

/// generic_rank memoized per (graph, d, seed). Thread-safe.
int cached_generic_rank(const Graph &graph, int d,
                        std::uint64_t seed = kDefaultSeed);

/// d * n - d(d+1)/2 for n >= d + 1, otherwise n(n-1)/2.
int rigid_rank(int n, int d);

bool is_generically_rigid(const Graph &graph, int d,
                          std::uint64_t seed = kDefaultSeed);

/// True iff rank R(p) equals the graph's generic rank.
bool is_regular_point(const Graph &graph, const Configuration &p,
                      std::uint64_t seed = kDefaultSeed);

/// Orthonormal basis of Im R(p), the tangent space of the edge manifold.
struct TangentBasis {
  Eigen::MatrixXd basis; // |E| x rank
  int rank = 0;
};

/// Throws std::domain_error when R(p) is the zero matrix.
TangentBasis tangent_basis(const Graph &graph, const Configuration &p);

/// Orthogonal projector onto Im R(p), computed as P P^T.
Eigen::MatrixXd projector(const Graph &graph, const Configuration &p);

struct Lift {
  Eigen::VectorXd u;     // node velocity
  double residual = 0.0; // norm of the component of v outside Im R(p)
  bool projected = false;
};

/// Minimum-norm u with 2 R(p) u = Pi v, i.e. u = (dF_p)^+ v = R(p)^+ v / 2.
/// The off-tangent part of v is dropped; `projected` is set when it exceeds
/// kLiftResidualTolerance.
Lift min_norm_lift(const Graph &graph, const Configuration &p,
                   const Eigen::VectorXd &v);

/// Infinitesimal translations and rotations at p, dn x d(d+1)/2.
/// Supports d in {1, 2, 3}; throws std::invalid_argument otherwise.
Eigen::MatrixXd rigid_motion_basis(const Configuration &p);

struct CongruenceResult {
  bool congruent = false;
  double displacement = 0.0; // max per-node distance after alignment
};

/// Best orthogonal alignment (reflections allowed) of q onto p after
/// centering; congruent iff the worst node displacement is below tol.
CongruenceResult congruence_check(const Configuration &p,
                                  const Configuration &q, double tol);

} // namespace formation
