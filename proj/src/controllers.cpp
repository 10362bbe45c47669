#include "formation/controllers.hpp"

#include "formation/rigidity.hpp"

namespace formation {

namespace {

void require_target(const Graph &graph, const Measurement &m_star) {
  if (m_star.size() != graph.edge_count())
    throw std::invalid_argument("target has " + std::to_string(m_star.size()) +
                                " entries but the graph has " +
                                std::to_string(graph.edge_count()) + " edges");
}

double spectral_norm(const Eigen::MatrixXd &m) {
  if (m.size() == 0)
    return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

FieldEvaluation lift_residual(const Eigen::MatrixXd &r, const Eigen::MatrixXd &nu,
                              const Eigen::VectorXd &residual) {
  FieldEvaluation f;
  f.u = nu.transpose() * residual;
  f.v = 2.0 * r * f.u;
  f.nu_norm = spectral_norm(nu);
  return f;
}

} // namespace

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
  case ControllerKind::gradient:
    return "gradient";
  case ControllerKind::model:
    return "model";
  case ControllerKind::directed:
    return "directed";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(std::string_view name) {
  if (name == "gradient")
    return ControllerKind::gradient;
  if (name == "model")
    return ControllerKind::model;
  if (name == "directed")
    return ControllerKind::directed;
  throw std::invalid_argument("unknown controller kind '" + std::string(name) +
                              "' (expected gradient, model or directed)");
}

ControllerSpec ControllerSpec::gradient(Graph g, Measurement target) {
  ControllerSpec s{ControllerKind::gradient, std::move(g), std::nullopt,
                   std::move(target)};
  s.validate();
  return s;
}

ControllerSpec ControllerSpec::model(Graph g, Measurement target) {
  ControllerSpec s{ControllerKind::model, std::move(g), std::nullopt,
                   std::move(target)};
  s.validate();
  return s;
}

ControllerSpec ControllerSpec::directed(Orientation o, Measurement target) {
  Graph g = o.graph();
  ControllerSpec s{ControllerKind::directed, std::move(g), std::move(o),
                   std::move(target)};
  s.validate();
  return s;
}

void ControllerSpec::validate() const {
  require_target(graph, target);
  if (kind == ControllerKind::directed) {
    if (!orientation)
      throw std::invalid_argument("directed controller needs an orientation");
    if (orientation->graph() != graph)
      throw std::invalid_argument(
          "orientation is over a different graph than the controller");
  } else if (orientation) {
    throw std::invalid_argument(std::string(to_string(kind)) +
                                " controller does not take an orientation");
  }
}

FieldEvaluation gradient_field(const Graph &graph, const Configuration &p,
                               const Measurement &m_star) {
  require_target(graph, m_star);
  const Eigen::MatrixXd r = rigidity_matrix(graph, p);
  const Eigen::VectorXd residual = m_star.values - distance_map(graph, p).values;
  return lift_residual(r, r, residual);
}

FieldEvaluation model_field(const Graph &graph, const Configuration &p,
                            const Measurement &m_star,
                            std::uint64_t genericity_seed) {
  require_target(graph, m_star);
  const Eigen::MatrixXd r = rigidity_matrix(graph, p);
  const auto svd = rank_revealing_svd(r);
  const int generic = cached_generic_rank(graph, p.dim(), genericity_seed);
  if (svd.rank < generic)
    throw RankDeficiencyError(svd.rank, generic);

  const Eigen::VectorXd residual = m_star.values - distance_map(graph, p).values;
  FieldEvaluation f;
  const Eigen::VectorXd v_star =
      svd.left * (svd.left.transpose() * residual); // -Pi (m - m*)
  f.u = 0.5 * svd.solve(v_star);
  f.v = 2.0 * r * f.u;
  f.nu_norm = svd.rank > 0 ? 0.5 / svd.sigma(svd.rank - 1) : 0.0;
  return f;
}

FieldEvaluation directed_field(const Orientation &orientation,
                               const Configuration &p,
                               const Measurement &m_star) {
  const Graph &graph = orientation.graph();
  require_target(graph, m_star);
  const Eigen::MatrixXd r = rigidity_matrix(graph, p);
  const Eigen::MatrixXd rd = directed_rigidity_matrix(orientation, p);
  const Eigen::VectorXd residual = m_star.values - distance_map(graph, p).values;
  return lift_residual(r, rd, residual);
}

FieldEvaluation evaluate_field(const ControllerSpec &spec,
                               const Configuration &p) {
  switch (spec.kind) {
  case ControllerKind::gradient:
    return gradient_field(spec.graph, p, spec.target);
  case ControllerKind::model:
    return model_field(spec.graph, p, spec.target, spec.genericity_seed);
  case ControllerKind::directed:
    return directed_field(*spec.orientation, p, spec.target);
  }
  throw std::logic_error("unhandled controller kind");
}

Eigen::MatrixXd eta_matrix(const ControllerSpec &spec, const Configuration &p) {
  spec.validate();
  const Eigen::MatrixXd r = rigidity_matrix(spec.graph, p);
  switch (spec.kind) {
  case ControllerKind::gradient:
    return 2.0 * r * r.transpose();
  case ControllerKind::model: {
    const auto svd = rank_revealing_svd(r);
    const int generic =
        cached_generic_rank(spec.graph, p.dim(), spec.genericity_seed);
    if (svd.rank < generic)
      throw RankDeficiencyError(svd.rank, generic);
    return svd.left * svd.left.transpose();
  }
  case ControllerKind::directed:
    return 2.0 * r *
           directed_rigidity_matrix(*spec.orientation, p).transpose();
  }
  throw std::logic_error("unhandled controller kind");
}

double node_potential(const Graph &graph, const Configuration &p,
                      const Measurement &m_star) {
  require_target(graph, m_star);
  return 0.25 * (distance_map(graph, p).values - m_star.values).squaredNorm();
}

double edge_potential(const Measurement &m, const Measurement &m_star) {
  if (m.size() != m_star.size())
    throw std::invalid_argument("measurement lengths differ");
  return 0.5 * (m.values - m_star.values).squaredNorm();
}

} // namespace formation
