#include "formation/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "formation/rigidity.hpp"
#include "parallel.hpp"

namespace formation {

namespace {

double matrix_norm2(const Eigen::MatrixXd &m) {
  if (m.size() == 0)
    return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

ControllerSpec spec_at(ControllerKind kind, const Graph &graph,
                       const std::optional<Orientation> &orientation,
                       const Configuration &p, std::uint64_t seed) {
  ControllerSpec spec{kind, graph, orientation, distance_map(graph, p), seed};
  spec.validate();
  return spec;
}

// Returns P, or nullopt when p is not a regular point.
std::optional<TangentBasis> regular_basis(const ControllerSpec &spec,
                                          const Configuration &p) {
  const auto svd = rank_revealing_svd(rigidity_matrix(spec.graph, p));
  const int generic =
      cached_generic_rank(spec.graph, p.dim(), spec.genericity_seed);
  if (svd.rank == 0 || svd.rank != generic)
    return std::nullopt;
  return TangentBasis{svd.left, svd.rank};
}

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

// Index combinations of `pool` of size k in lexicographic order.
std::vector<std::vector<std::size_t>>
combinations(const std::vector<std::size_t> &pool, int k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<bool> pick(pool.size(), false);
  std::fill(pick.begin(), pick.begin() + k, true);
  do {
    std::vector<std::size_t> c;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (pick[i])
        c.push_back(pool[i]);
    out.push_back(std::move(c));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

} // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
  case Verdict::pass:
    return "pass";
  case Verdict::fail:
    return "fail";
  case Verdict::indeterminate:
    return "indeterminate";
  }
  return "unknown";
}

std::string_view to_string(PersistenceVerdict v) {
  switch (v) {
  case PersistenceVerdict::persistent:
    return "persistent";
  case PersistenceVerdict::not_persistent:
    return "not-persistent";
  case PersistenceVerdict::indeterminate:
    return "indeterminate";
  }
  return "unknown";
}

Spectrum sorted_eigenvalues(const Eigen::MatrixXd &m) {
  if (m.size() == 0)
    return {};
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  const auto &ev = solver.eigenvalues();
  Spectrum out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
    if (a.real() != b.real())
      return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

CertificateReport sym_form_certificate(const Eigen::MatrixXd &eta,
                                       const Eigen::MatrixXd &basis) {
  CertificateReport rep;
  rep.rank_r = static_cast<int>(basis.cols());
  if (rep.rank_r == 0) {
    rep.diagnostic = "tangent space is trivial";
    return rep;
  }
  const Eigen::MatrixXd a = basis.transpose() * eta * basis;
  const Eigen::MatrixXd s = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(s,
                                                     Eigen::EigenvaluesOnly);
  const auto &ev = sym.eigenvalues();
  rep.min_sym_eigenvalue = ev.minCoeff();
  rep.spectral_norm = ev.cwiseAbs().maxCoeff();
  rep.spectrum = sorted_eigenvalues(a);
  rep.verdict = rep.min_sym_eigenvalue > rep.tol_pd * rep.spectral_norm
                    ? Verdict::pass
                    : Verdict::fail;
  return rep;
}

CertificateReport restricted_sym_form(const ControllerSpec &spec,
                                      const Configuration &p_star) {
  spec.validate();
  const auto basis = regular_basis(spec, p_star);
  if (!basis) {
    CertificateReport rep;
    rep.kind = to_string(spec.kind);
    rep.diagnostic = "target is not a regular point of the distance map";
    return rep;
  }
  auto rep = sym_form_certificate(eta_matrix(spec, p_star), basis->basis);
  rep.kind = to_string(spec.kind);
  return rep;
}

LinearizedEdgeDynamics linearized_edge_matrix(const ControllerSpec &spec,
                                              const Configuration &p_star) {
  spec.validate();
  const auto basis = regular_basis(spec, p_star);
  if (!basis)
    throw std::domain_error("target is not a regular point of the distance map");
  LinearizedEdgeDynamics out;
  out.restricted =
      basis->basis.transpose() * eta_matrix(spec, p_star) * basis->basis;
  out.eigenvalues = sorted_eigenvalues(out.restricted);
  out.rank_r = basis->rank;
  return out;
}

AdmissibilityReport admissibility(ControllerKind kind, const Graph &graph,
                                  const std::optional<Orientation> &orientation,
                                  int d, const AdmissibilityOptions &opts) {
  if (opts.samples < 1)
    throw std::invalid_argument("admissibility needs at least one sample");
  AdmissibilityReport rep;
  rep.seed = opts.seed;
  rep.samples.resize(static_cast<std::size_t>(opts.samples));

  detail::parallel_for(rep.samples.size(), opts.jobs, [&](std::size_t i) {
    auto &s = rep.samples[i];
    s.seed = derive_seed(opts.seed, i);
    Rng rng(s.seed);
    while (s.attempts < opts.max_attempts_per_sample) {
      ++s.attempts;
      const auto p = random_configuration(graph.vertex_count(), d, rng);
      const auto spec = spec_at(kind, graph, orientation, p, opts.seed);
      const auto basis = regular_basis(spec, p);
      if (!basis)
        continue;
      const Eigen::MatrixXd a =
          basis->basis.transpose() * eta_matrix(spec, p) * basis->basis;
      s.regular = true;
      s.spectrum = sorted_eigenvalues(a);
      s.spectral_norm = matrix_norm2(a);
      s.min_abs_real = std::numeric_limits<double>::infinity();
      s.min_abs = std::numeric_limits<double>::infinity();
      for (const auto &lambda : s.spectrum) {
        s.min_abs_real = std::min(s.min_abs_real, std::abs(lambda.real()));
        s.min_abs = std::min(s.min_abs, std::abs(lambda));
      }
      s.hyperbolic = s.min_abs_real > kTolHyperbolic * s.spectral_norm;
      s.invertible = s.min_abs > kTolInvertible * s.spectral_norm;
      break;
    }
  });

  const bool all_regular = std::all_of(rep.samples.begin(), rep.samples.end(),
                                       [](const auto &s) { return s.regular; });
  if (all_regular) {
    const auto all = [&](bool AdmissibilitySample::*flag) {
      return std::all_of(rep.samples.begin(), rep.samples.end(),
                         [&](const auto &s) { return s.*flag; });
    };
    rep.dynamic = all(&AdmissibilitySample::hyperbolic) ? Verdict::pass
                                                        : Verdict::fail;
    rep.algebraic = all(&AdmissibilitySample::invertible) ? Verdict::pass
                                                          : Verdict::fail;
  }
  return rep;
}

Verdict dynamic_admissibility(ControllerKind kind, const Graph &graph,
                              const std::optional<Orientation> &orientation,
                              int d, const AdmissibilityOptions &opts) {
  return admissibility(kind, graph, orientation, d, opts).dynamic;
}

Verdict algebraic_admissibility(ControllerKind kind, const Graph &graph,
                                const std::optional<Orientation> &orientation,
                                int d, const AdmissibilityOptions &opts) {
  return admissibility(kind, graph, orientation, d, opts).algebraic;
}

std::size_t reduction_count(const Orientation &orientation, int d) {
  std::size_t total = 1;
  for (int v = 0; v < orientation.graph().vertex_count(); ++v) {
    const auto out = static_cast<std::size_t>(orientation.out_degree(v));
    if (out <= static_cast<std::size_t>(d))
      continue;
    const std::size_t c = binomial(out, static_cast<std::size_t>(d));
    if (total > std::numeric_limits<std::size_t>::max() / c)
      return std::numeric_limits<std::size_t>::max();
    total *= c;
  }
  return total;
}

PersistenceReport persistence_check(const Orientation &orientation, int d,
                                    const PersistenceOptions &opts) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("persistence check supports d = 2 or 3");
  const Graph &graph = orientation.graph();
  PersistenceReport rep;
  rep.reductions_total = reduction_count(orientation, d);
  if (rep.reductions_total > opts.cap)
    return rep;

  // Edges always kept, and per-vertex choice lists for the rest.
  std::vector<std::size_t> fixed;
  std::vector<std::vector<std::vector<std::size_t>>> choices;
  for (int v = 0; v < graph.vertex_count(); ++v) {
    const auto out = orientation.out_edges(v);
    if (static_cast<int>(out.size()) <= d)
      fixed.insert(fixed.end(), out.begin(), out.end());
    else
      choices.push_back(combinations(out, d));
  }

  const auto rows_of = [&](std::size_t index) {
    std::vector<std::size_t> rows = fixed;
    // mixed radix, last vertex fastest
    for (auto it = choices.rbegin(); it != choices.rend(); ++it) {
      const auto &pick = (*it)[index % it->size()];
      rows.insert(rows.end(), pick.begin(), pick.end());
      index /= it->size();
    }
    return rows;
  };

  std::vector<char> flexible(rep.reductions_total, 0);
  detail::parallel_for(rep.reductions_total, opts.jobs, [&](std::size_t k) {
    const Graph reduced = graph.subgraph(rows_of(k));
    flexible[k] = generic_rank(reduced, d, opts.seed) !=
                  rigid_rank(graph.vertex_count(), d);
  });

  rep.reductions_checked = rep.reductions_total;
  for (std::size_t k = 0; k < flexible.size(); ++k) {
    if (!flexible[k])
      continue;
    ++rep.flexible_reductions;
    if (!rep.witness)
      rep.witness = graph.subgraph(rows_of(k));
  }
  rep.verdict = rep.witness ? PersistenceVerdict::not_persistent
                            : PersistenceVerdict::persistent;
  return rep;
}

} // namespace formation
