#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "formation/graph.hpp"
#include "formation/random.hpp"

namespace formation {

enum class ControllerKind { gradient, model, directed };

std::string_view to_string(ControllerKind kind);
/// Throws std::invalid_argument for an unknown name.
ControllerKind parse_controller_kind(std::string_view name);

/// Raised by the model controller when R(p) drops below the generic rank.
class RankDeficiencyError : public std::runtime_error {
public:
  RankDeficiencyError(int rank, int generic)
      : std::runtime_error("rigidity matrix rank " + std::to_string(rank) +
                           " below generic rank " + std::to_string(generic)),
        rank_(rank), generic_(generic) {}
  int rank() const { return rank_; }
  int generic_rank() const { return generic_; }

private:
  int rank_;
  int generic_;
};

/// One member of the (nu, eta) controller family together with its target.
struct ControllerSpec {
  ControllerKind kind = ControllerKind::gradient;
  Graph graph;
  std::optional<Orientation> orientation; // required iff kind == directed
  Measurement target;                     // m*
  std::uint64_t genericity_seed = kDefaultSeed;

  static ControllerSpec gradient(Graph g, Measurement target);
  static ControllerSpec model(Graph g, Measurement target);
  static ControllerSpec directed(Orientation o, Measurement target);

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

/// Node and edge velocity of a controller at one state.
struct FieldEvaluation {
  Eigen::VectorXd u;    // node velocity, dn
  Eigen::VectorXd v;    // edge velocity, |E|; v = 2 R(p) u
  double nu_norm = 0.0; // operator norm of nu at the state
};

/// u = R^T (m* - F(p)).
FieldEvaluation gradient_field(const Graph &graph, const Configuration &p,
                               const Measurement &m_star);

/// v* = -Pi(m)(m - m*), u = R^+ v* / 2. Throws RankDeficiencyError when p is
/// not a regular point.
FieldEvaluation model_field(const Graph &graph, const Configuration &p,
                            const Measurement &m_star,
                            std::uint64_t genericity_seed = kDefaultSeed);

/// u = ->R^T (m* - F(p)); each agent reacts only to its out-edges.
FieldEvaluation directed_field(const Orientation &orientation,
                               const Configuration &p,
                               const Measurement &m_star);

FieldEvaluation evaluate_field(const ControllerSpec &spec,
                               const Configuration &p);

/// eta at (p, F(p)): 2RR^T, Pi, or 2R ->R^T depending on the kind.
Eigen::MatrixXd eta_matrix(const ControllerSpec &spec, const Configuration &p);

/// V(p) = |F(p) - m*|^2 / 4.
double node_potential(const Graph &graph, const Configuration &p,
                      const Measurement &m_star);

/// V_e(m) = |m - m*|^2 / 2.
double edge_potential(const Measurement &m, const Measurement &m_star);

} // namespace formation
