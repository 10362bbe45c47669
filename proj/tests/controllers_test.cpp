#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "formation/controllers.hpp"
#include "formation/rigidity.hpp"
#include "oracles.hpp"

using namespace formation;

namespace {

const Graph kEdge = Graph::from_labels(2, {{1, 2}});
const Configuration kEdgePoints(1, {0.0, 1.0});
const Measurement kFour{Eigen::VectorXd::Constant(1, 4.0)};

Configuration jitter(const Configuration &p, double scale, std::uint64_t seed) {
  Rng rng(seed);
  return perturb(p, scale, rng);
}

bool tangent(const Graph &g, const Configuration &p, const FieldEvaluation &f) {
  return (f.v - 2.0 * rigidity_matrix(g, p) * f.u).norm() <=
         1e-10 * (1.0 + f.v.norm());
}

} // namespace

TEST_CASE("controller kind names") {
  CHECK(parse_controller_kind("model") == ControllerKind::model);
  CHECK(to_string(ControllerKind::directed) == "directed");
  CHECK_THROWS_AS(parse_controller_kind("pid"), std::invalid_argument);
}

TEST_CASE("ControllerSpec invariants") {
  const auto m = distance_map(test::wheel5(), test::wheel5_target());
  CHECK_NOTHROW(ControllerSpec::directed(test::wheel5_directed(), m));
  ControllerSpec bad{ControllerKind::directed, test::wheel5(), std::nullopt, m};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  ControllerSpec extra{ControllerKind::gradient, test::wheel5(),
                       test::wheel5_directed(), m};
  CHECK_THROWS_AS(extra.validate(), std::invalid_argument);
  ControllerSpec mismatch{ControllerKind::directed, test::four_cycle(),
                          test::wheel5_directed(), m};
  CHECK_THROWS_AS(mismatch.validate(), std::invalid_argument);
  CHECK_THROWS_AS(ControllerSpec::gradient(test::triangle(), m),
                  std::invalid_argument);
}

TEST_CASE("gradient_field") {
  SUBCASE("single edge pulls agents apart") {
    const auto f = gradient_field(kEdge, kEdgePoints, kFour);
    CHECK(f.u(0) == doctest::Approx(-3.0));
    CHECK(f.u(1) == doctest::Approx(3.0));
    CHECK(tangent(kEdge, kEdgePoints, f));
  }
  SUBCASE("equilibrium") {
    const auto p = test::wheel5_target();
    const auto f = gradient_field(test::wheel5(), p, distance_map(test::wheel5(), p));
    CHECK(f.u.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("matches the agentwise law on perturbed W5") {
    const auto g = test::wheel5();
    const auto m_star = distance_map(g, test::wheel5_target());
    const auto p = jitter(test::wheel5_target(), 0.1, 4);
    const auto f = gradient_field(g, p, m_star);
    const Eigen::VectorXd agentwise = oracle::agentwise_law(g, p, m_star.values);
    CHECK((f.u - agentwise).cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("wrong target length") {
    CHECK_THROWS_AS(gradient_field(test::wheel5(), test::wheel5_target(), kFour),
                    std::invalid_argument);
  }
}

TEST_CASE("model_field") {
  SUBCASE("single edge") {
    const auto f = model_field(kEdge, kEdgePoints, kFour);
    CHECK(f.v(0) == doctest::Approx(3.0));
    CHECK(f.u(0) == doctest::Approx(-0.75));
    CHECK(f.u(1) == doctest::Approx(0.75));
  }
  SUBCASE("equilibrium") {
    const auto p = test::wheel5_target();
    const auto f = model_field(test::wheel5(), p, distance_map(test::wheel5(), p));
    CHECK(f.u.cwiseAbs().maxCoeff() == 0.0);
    CHECK(f.v.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("W5 perturbed: minimal norm among all realizations of v*") {
    const auto g = test::wheel5();
    const auto m_star = distance_map(g, test::wheel5_target());
    const auto p = jitter(test::wheel5_target(), 0.1, 6);
    const auto f = model_field(g, p, m_star);
    const Eigen::MatrixXd r = rigidity_matrix(g, p);
    const Eigen::VectorXd m = distance_map(g, p).values;
    const Eigen::MatrixXd pi = r * oracle::pseudo_inverse(r);
    const Eigen::VectorXd v_star = -pi * (m - m_star.values);
    CHECK((f.v - v_star).norm() < 1e-10);
    const Eigen::MatrixXd ker = oracle::kernel(r);
    REQUIRE(ker.cols() == 3);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < 10; ++k) {
      Eigen::Vector3d c(gauss(rng), gauss(rng), gauss(rng));
      const Eigen::VectorXd other = f.u + 1e-2 * ker * c;
      CHECK((2.0 * r * other - v_star).norm() < 1e-10);
      CHECK(other.norm() > f.u.norm());
    }
  }
  SUBCASE("rank-deficient state") {
    const auto collinear = Configuration::from_points({{0, 0}, {1, 0}, {2, 0}});
    const auto target = Configuration::from_points({{0, 0}, {1, 0}, {0, 1}});
    CHECK_THROWS_AS(model_field(test::triangle(), collinear,
                                distance_map(test::triangle(), target)),
                    RankDeficiencyError);
  }
}

TEST_CASE("directed_field") {
  SUBCASE("only the tail moves") {
    const auto o = Orientation::from_labels(kEdge, {{1, 2}});
    const auto f = directed_field(o, kEdgePoints, kFour);
    CHECK(f.u(0) == doctest::Approx(-3.0));
    CHECK(f.u(1) == 0.0);
    CHECK(tangent(kEdge, kEdgePoints, f));
  }
  SUBCASE("equilibrium") {
    const auto p = test::wheel5_target();
    const auto f = directed_field(test::wheel5_directed(), p,
                                  distance_map(test::wheel5(), p));
    CHECK(f.u.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("matches per-agent sums over out-edges") {
    const auto o = test::wheel5_directed();
    const auto m_star = distance_map(o.graph(), test::wheel5_target());
    const auto p = jitter(test::wheel5_target(), 0.1, 9);
    const auto f = directed_field(o, p, m_star);
    const Eigen::VectorXd agentwise =
        oracle::agentwise_law(o.graph(), p, m_star.values, &o.tails());
    CHECK((f.u - agentwise).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("eta_matrix") {
  SUBCASE("single directed edge") {
    const auto o = Orientation::from_labels(kEdge, {{1, 2}});
    const auto eta = eta_matrix(ControllerSpec::directed(o, kFour), kEdgePoints);
    CHECK(eta(0, 0) == doctest::Approx(2.0));
  }
  SUBCASE("model kind is a projector") {
    const auto p = jitter(test::wheel5_target(), 0.05, 2);
    const auto spec = ControllerSpec::model(
        test::wheel5(), distance_map(test::wheel5(), test::wheel5_target()));
    const auto eta = eta_matrix(spec, p);
    CHECK((eta * eta - eta).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("gradient kind on W5 is PSD with rank 7") {
    const auto spec = ControllerSpec::gradient(
        test::wheel5(), distance_map(test::wheel5(), test::wheel5_target()));
    const auto eta = eta_matrix(spec, test::wheel5_target());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eta);
    const auto &ev = es.eigenvalues();
    CHECK(ev.minCoeff() > -1e-12);
    int positive = 0;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
      positive += ev(k) > 1e-10 * ev.maxCoeff();
    CHECK(positive == 7);
  }
  SUBCASE("v = eta (m* - m) for every kind") {
    const auto g = test::wheel5();
    const auto m_star = distance_map(g, test::wheel5_target());
    const auto p = jitter(test::wheel5_target(), 0.1, 12);
    const Eigen::VectorXd e = m_star.values - distance_map(g, p).values;
    for (const auto &spec :
         {ControllerSpec::gradient(g, m_star), ControllerSpec::model(g, m_star),
          ControllerSpec::directed(test::wheel5_directed(), m_star)}) {
      const auto f = evaluate_field(spec, p);
      CHECK((f.v - eta_matrix(spec, p) * e).norm() < 1e-10 * (1.0 + f.v.norm()));
    }
  }
}

TEST_CASE("potentials") {
  const auto p = test::wheel5_target();
  const auto m = distance_map(test::wheel5(), p);
  CHECK(node_potential(test::wheel5(), p, m) == 0.0);
  CHECK(edge_potential(m, m) == 0.0);
  const Measurement one{Eigen::VectorXd::Constant(1, 1.0)};
  CHECK(node_potential(kEdge, kEdgePoints, kFour) == doctest::Approx(9.0 / 4.0));
  CHECK(edge_potential(one, kFour) == doctest::Approx(9.0 / 2.0));
}

TEST_CASE("property battery C1-C5") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> pick_n(3, 8), pick_d(1, 3);
  std::uniform_real_distribution<double> density(0.4, 1.0);
  int model_checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = pick_n(rng);
    const int d = pick_d(rng);
    const auto g = oracle::random_graph(n, density(rng), rng);
    const auto o = oracle::random_orientation(g, rng);
    const auto target = oracle::random_config(n, d, rng);
    const auto m_star = distance_map(g, target);
    Rng prng(static_cast<std::uint64_t>(trial));
    const auto p = perturb(target, 0.1, prng);
    CAPTURE(trial);

    std::vector<ControllerSpec> specs{ControllerSpec::gradient(g, m_star),
                                      ControllerSpec::directed(o, m_star)};
    if (is_regular_point(g, p) && is_regular_point(g, target)) {
      specs.push_back(ControllerSpec::model(g, m_star));
      ++model_checked;
    }
    const Eigen::VectorXd e = m_star.values - distance_map(g, p).values;
    for (const auto &spec : specs) {
      const auto f = evaluate_field(spec, p);
      // C1 tangency
      CHECK(tangent(g, p, f));
      // C3 chain rule along the flow: dV_e/dt = -q_eta(m* - m)
      const double h = 1e-6;
      Configuration fwd = p, bwd = p;
      fwd.coords() += h * f.u;
      bwd.coords() -= h * f.u;
      const double dv = (edge_potential(distance_map(g, fwd), m_star) -
                         edge_potential(distance_map(g, bwd), m_star)) /
                        (2.0 * h);
      const double q = e.dot(eta_matrix(spec, p) * e);
      CHECK(std::abs(dv + q) <= 1e-4 * std::abs(q) + 1e-12);
      // C4 equilibria
      const auto eq = evaluate_field(
          ControllerSpec{spec.kind, g, spec.orientation, m_star}, target);
      CHECK(eq.u.cwiseAbs().maxCoeff() == 0.0);
      if (spec.kind == ControllerKind::model) {
        const Eigen::VectorXd pe = projector(g, p) * e;
        CHECK((f.v - pe).norm() < 1e-9 * (1.0 + pe.norm()));
      }
    }

    // C2: dV/dt = -|u|^2 under the gradient law
    const auto fg = gradient_field(g, p, m_star);
    const double h = 1e-6;
    Configuration fwd = p, bwd = p;
    fwd.coords() += h * fg.u;
    bwd.coords() -= h * fg.u;
    const double dv =
        (node_potential(g, fwd, m_star) - node_potential(g, bwd, m_star)) / (2.0 * h);
    CHECK(dv <= 1e-12);
    CHECK(std::abs(dv + fg.u.squaredNorm()) <= 1e-5 * fg.u.squaredNorm() + 1e-12);

    // C5: agent i's velocity ignores every vertex that is not an out-neighbour
    const auto fd = directed_field(o, p, m_star);
    for (int agent = 0; agent < n; ++agent) {
      std::vector<bool> relevant(static_cast<std::size_t>(n), false);
      relevant[agent] = true;
      for (auto row : o.out_edges(agent))
        relevant[static_cast<std::size_t>(o.head(row))] = true;
      Configuration moved = p;
      for (int k = 0; k < n; ++k)
        if (!relevant[static_cast<std::size_t>(k)])
          moved.point(k).array() += 0.37;
      const auto fm = directed_field(o, moved, m_star);
      CHECK(fm.u.segment(agent * d, d) == fd.u.segment(agent * d, d));
    }
  }
  CHECK(model_checked > 10);
}
