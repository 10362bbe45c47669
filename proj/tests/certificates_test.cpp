#include <doctest.h>

#include <algorithm>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "fixtures.hpp"
#include "formation/certificates.hpp"
#include "formation/rigidity.hpp"
#include "oracles.hpp"

using namespace formation;

namespace {

// Orthonormal basis of range(R) by column-pivoted QR, independent of the SVD.
Eigen::MatrixXd qr_range(const Eigen::MatrixXd &r) {
  const int rank = oracle::lu_rank(r);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(r);
  const Eigen::MatrixXd q = qr.householderQ();
  return q.leftCols(rank);
}

double oracle_min_sym(const Eigen::MatrixXd &eta, const Eigen::MatrixXd &basis) {
  const Eigen::MatrixXd s = 0.5 * basis.transpose() * (eta + eta.transpose()) * basis;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues().minCoeff();
}

Eigen::MatrixXd random_orthogonal(int k, std::mt19937_64 &rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd m(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      m(a, b) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ();
}

ControllerSpec spec_for(ControllerKind kind, const Orientation &o,
                        const Configuration &p_star) {
  const auto m = distance_map(o.graph(), p_star);
  switch (kind) {
  case ControllerKind::gradient:
    return ControllerSpec::gradient(o.graph(), m);
  case ControllerKind::model:
    return ControllerSpec::model(o.graph(), m);
  case ControllerKind::directed:
    break;
  }
  return ControllerSpec::directed(o, m);
}

// Persistence by brute force over edge subsets, rigidity by LU on a
// finite-difference Jacobian at a random point.
bool brute_persistent(const Orientation &o, int d, std::size_t &reductions) {
  const auto &g = o.graph();
  const int m = static_cast<int>(g.edge_count());
  std::mt19937_64 rng(5);
  const auto x = oracle::random_config(g.vertex_count(), d, rng);
  const int full = d * g.vertex_count() - d * (d + 1) / 2;
  reductions = 0;
  bool all_rigid = true;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    bool ok = true;
    for (int v = 0; v < g.vertex_count() && ok; ++v) {
      int kept = 0, out = o.out_degree(v);
      for (int e = 0; e < m; ++e)
        if (o.tail(static_cast<std::size_t>(e)) == v && (mask >> e & 1u))
          ++kept;
      const int want = out > d ? d : out;
      ok = kept == want;
    }
    if (!ok)
      continue;
    ++reductions;
    std::vector<std::size_t> rows;
    for (int e = 0; e < m; ++e)
      if (mask >> e & 1u)
        rows.push_back(static_cast<std::size_t>(e));
    const auto sub = g.subgraph(rows);
    if (oracle::lu_rank(oracle::fd_jacobian(sub, x, 1e-6)) < full)
      all_rigid = false;
  }
  return all_rigid;
}

std::size_t binom(int n, int k) {
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i)
    r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

} // namespace

TEST_CASE("sorted_eigenvalues orders by real then imaginary part") {
  Eigen::Matrix3d m;
  m << 0, -1, 0, 1, 0, 0, 0, 0, -2;
  const auto s = sorted_eigenvalues(m);
  REQUIRE(s.size() == 3);
  CHECK(s[0].real() == doctest::Approx(-2.0));
  CHECK(s[1].imag() == doctest::Approx(-1.0));
  CHECK(s[2].imag() == doctest::Approx(1.0));
}

TEST_CASE("single edge certificate") {
  const auto g = Graph::from_labels(2, {{1, 2}});
  const Configuration p(1, {0.0, 2.0});
  const auto r = restricted_sym_form(
      ControllerSpec::gradient(g, distance_map(g, p)), p);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.rank_r == 1);
  // 2 R R^T with R = [-2, 2] is [16]
  CHECK(r.min_sym_eigenvalue == doctest::Approx(16.0));
  const auto o = Orientation::from_labels(g, {{1, 2}});
  const auto rd = restricted_sym_form(ControllerSpec::directed(o, distance_map(g, p)), p);
  CHECK(rd.min_sym_eigenvalue == doctest::Approx(8.0));
}

TEST_CASE("directed W5") {
  const auto o = test::wheel5_directed();
  SUBCASE("good target passes") {
    const auto p = test::wheel5_target();
    const auto spec = ControllerSpec::directed(o, distance_map(o.graph(), p));
    const auto r = restricted_sym_form(spec, p);
    CHECK(r.verdict == Verdict::pass);
    CHECK(r.rank_r == 7);
    CHECK(r.min_sym_eigenvalue == doctest::Approx(0.1623).epsilon(1e-3));
    CHECK(r.min_sym_eigenvalue ==
          doctest::Approx(oracle_min_sym(eta_matrix(spec, p),
                                         qr_range(rigidity_matrix(o.graph(), p))))
              .epsilon(1e-9));
    const auto lin = linearized_edge_matrix(spec, p);
    for (const auto &lambda : lin.eigenvalues)
      CHECK(lambda.real() > 0.0);
    CHECK(lin.eigenvalues.front().real() == doctest::Approx(1.262).epsilon(2e-3));
  }
  SUBCASE("moved hub fails") {
    const auto p = test::wheel5_bad_target();
    const auto spec = ControllerSpec::directed(o, distance_map(o.graph(), p));
    const auto r = restricted_sym_form(spec, p);
    CHECK(r.verdict == Verdict::fail);
    CHECK(r.min_sym_eigenvalue == doctest::Approx(-2.069).epsilon(1e-3));
    const auto lin = linearized_edge_matrix(spec, p);
    CHECK(lin.eigenvalues.front().real() <= 0.0);
  }
}

TEST_CASE("figure-4 formation passes the certificate") {
  const auto o = test::fig4_directed();
  const auto p = test::fig4_target();
  const auto r = restricted_sym_form(
      ControllerSpec::directed(o, distance_map(o.graph(), p)), p);
  CHECK(r.rank_r == 9);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.min_sym_eigenvalue == doctest::Approx(0.2423).epsilon(1e-3));
}

TEST_CASE("linearized dynamics per kind") {
  const auto o = test::wheel5_directed();
  const auto p = test::wheel5_target();
  SUBCASE("gradient: real positive spectrum") {
    const auto lin = linearized_edge_matrix(spec_for(ControllerKind::gradient, o, p), p);
    for (const auto &lambda : lin.eigenvalues) {
      CHECK(std::abs(lambda.imag()) < 1e-9);
      CHECK(lambda.real() > 0.0);
    }
  }
  SUBCASE("model: identity") {
    const auto lin = linearized_edge_matrix(spec_for(ControllerKind::model, o, p), p);
    CHECK((lin.restricted - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("non-regular target") {
  const auto g = test::triangle();
  const auto p = Configuration::from_points({{0, 0}, {1, 0}, {3, 0}});
  const auto spec = ControllerSpec::gradient(g, distance_map(g, p));
  CHECK(restricted_sym_form(spec, p).verdict == Verdict::indeterminate);
  CHECK_THROWS_AS(linearized_edge_matrix(spec, p), std::domain_error);
}

TEST_CASE("property battery Z1-Z4") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick_n(3, 7), pick_d(2, 3);
  int passes = 0, fails = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = pick_n(rng);
    const int d = pick_d(rng);
    const auto g = oracle::random_graph(n, 0.75, rng);
    const auto o = oracle::random_orientation(g, rng);
    const auto p = oracle::random_config(n, d, rng);
    if (!is_regular_point(g, p))
      continue;
    CAPTURE(trial);
    for (auto kind : {ControllerKind::gradient, ControllerKind::model,
                      ControllerKind::directed}) {
      const auto spec = spec_for(kind, o, p);
      const auto r = restricted_sym_form(spec, p);
      const auto lin = linearized_edge_matrix(spec, p);
      REQUIRE(r.verdict != Verdict::indeterminate);
      (r.verdict == Verdict::pass ? passes : fails) += 1;
      if (kind != ControllerKind::directed)
        CHECK(r.verdict == Verdict::pass);

      // Z1, Z4: S > 0 implies Hurwitz, hence hyperbolic, hence invertible
      if (r.verdict == Verdict::pass) {
        for (const auto &lambda : lin.eigenvalues) {
          CHECK(lambda.real() > 0.0);
          CHECK(std::abs(lambda) > 0.0);
        }
      }

      // Z2: any orthonormal basis of the tangent space gives the same verdict
      const auto tb = tangent_basis(g, p);
      const Eigen::MatrixXd q = random_orthogonal(tb.rank, rng);
      const Eigen::MatrixXd eta = eta_matrix(spec, p);
      const auto rotated = sym_form_certificate(eta, tb.basis * q);
      CHECK(rotated.verdict == r.verdict);
      CHECK(std::abs(rotated.min_sym_eigenvalue - r.min_sym_eigenvalue) <=
            1e-8 * std::max(1.0, r.spectral_norm));
      CHECK(std::abs(oracle_min_sym(eta, qr_range(rigidity_matrix(g, p))) -
                     r.min_sym_eigenvalue) <= 1e-8 * std::max(1.0, r.spectral_norm));

      // Z3: scaling the target leaves the verdict alone
      Configuration scaled = p;
      scaled.coords() *= 3.7;
      CHECK(restricted_sym_form(spec_for(kind, o, scaled), scaled).verdict ==
            r.verdict);
    }
  }
  CHECK(passes > 50);
  CHECK(fails > 0);
}

TEST_CASE("Z4: dynamic admissibility implies algebraic") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pick_n(3, 7), pick_d(1, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = pick_n(rng);
    const int d = pick_d(rng);
    const auto g = oracle::random_graph(n, 0.6, rng);
    const auto o = oracle::random_orientation(g, rng);
    CAPTURE(trial);
    for (auto kind : {ControllerKind::gradient, ControllerKind::model,
                      ControllerKind::directed}) {
      AdmissibilityOptions opts;
      opts.seed = static_cast<std::uint64_t>(trial);
      const auto rep = admissibility(
          kind, g,
          kind == ControllerKind::directed ? std::optional<Orientation>(o)
                                           : std::nullopt,
          d, opts);
      if (rep.dynamic == Verdict::pass)
        CHECK(rep.algebraic == Verdict::pass);
      if (kind != ControllerKind::directed)
        CHECK(rep.dynamic == Verdict::pass);
    }
  }
}

TEST_CASE("admissibility") {
  SUBCASE("gradient on rigid graphs") {
    for (const auto &g : {test::triangle(), test::wheel5()}) {
      const auto rep = admissibility(ControllerKind::gradient, g, std::nullopt, 2);
      CHECK(rep.dynamic == Verdict::pass);
      CHECK(rep.algebraic == Verdict::pass);
      CHECK(rep.samples.size() == 5);
    }
  }
  SUBCASE("directed W5 and the cyclic triangle") {
    const auto w = test::wheel5_directed();
    CHECK(dynamic_admissibility(ControllerKind::directed, w.graph(), w, 2) ==
          Verdict::pass);
    CHECK(algebraic_admissibility(ControllerKind::directed, w.graph(), w, 2) ==
          Verdict::pass);
    const auto c = test::triangle_cyclic();
    CHECK(admissibility(ControllerKind::directed, c.graph(), c, 2).dynamic ==
          Verdict::pass);
  }
  SUBCASE("seeded runs repeat") {
    const auto w = test::wheel5_directed();
    AdmissibilityOptions opts;
    opts.seed = 99;
    const auto a = admissibility(ControllerKind::directed, w.graph(), w, 2, opts);
    opts.jobs = 3;
    const auto b = admissibility(ControllerKind::directed, w.graph(), w, 2, opts);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
      CHECK(a.samples[k].seed == b.samples[k].seed);
      CHECK(a.samples[k].spectrum == b.samples[k].spectrum);
    }
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(admissibility(ControllerKind::directed, test::wheel5(),
                                  std::nullopt, 2),
                    std::invalid_argument);
  }
}

TEST_CASE("persistence") {
  SUBCASE("cyclic triangle and directed W5") {
    CHECK(persistence_check(test::triangle_cyclic(), 2).verdict ==
          PersistenceVerdict::persistent);
    const auto w = persistence_check(test::wheel5_directed(), 2);
    CHECK(w.verdict == PersistenceVerdict::persistent);
    CHECK(w.reductions_total == 1);
  }
  SUBCASE("figure-4 formation is not persistent") {
    const auto rep = persistence_check(test::fig4_directed(), 2);
    CHECK(rep.verdict == PersistenceVerdict::not_persistent);
    CHECK(rep.reductions_total == 9);
    CHECK(rep.reductions_checked == 9);
    CHECK(rep.flexible_reductions == 1);
    REQUIRE(rep.witness);
    const std::vector<LabelPair> expected{{1, 2}, {2, 3}, {2, 4}, {2, 5}, {2, 6},
                                          {3, 4}, {3, 5}, {4, 6}, {5, 6}};
    CHECK(rep.witness->labels() == expected);
    CHECK_FALSE(is_generically_rigid(*rep.witness, 2));
  }
  SUBCASE("cap exceeded") {
    PersistenceOptions opts;
    opts.cap = 8;
    const auto rep = persistence_check(test::fig4_directed(), 2, opts);
    CHECK(rep.verdict == PersistenceVerdict::indeterminate);
    CHECK(rep.reductions_checked == 0);
  }
  SUBCASE("unsupported dimension") {
    CHECK_THROWS_AS(persistence_check(test::triangle_cyclic(), 1),
                    std::invalid_argument);
  }
  SUBCASE("Z5 count and verdict against brute force") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> pick_n(4, 6), pick_d(2, 3);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = pick_n(rng);
      const int d = pick_d(rng);
      const auto g = oracle::random_graph(n, 0.8, rng);
      if (g.edge_count() > 14)
        continue;
      const auto o = oracle::random_orientation(g, rng);
      CAPTURE(trial);
      std::size_t formula = 1;
      for (int v = 0; v < n; ++v)
        if (o.out_degree(v) > d)
          formula *= binom(o.out_degree(v), d);
      CHECK(reduction_count(o, d) == formula);
      std::size_t brute_count = 0;
      const bool brute = brute_persistent(o, d, brute_count);
      const auto rep = persistence_check(o, d);
      CHECK(rep.reductions_total == brute_count);
      CHECK((rep.verdict == PersistenceVerdict::persistent) == brute);
    }
  }
}
