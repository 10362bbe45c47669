#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "formation/controllers.hpp"
#include "formation/graph.hpp"

namespace formation {

enum class IntegratorMethod { rk4, rk45 };
std::string_view to_string(IntegratorMethod m);
IntegratorMethod parse_integrator_method(std::string_view name);

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::rk45;
  double dt = 1e-3;        // fixed step for rk4
  double rtol = 1e-8;      // rk45 only
  double atol = 1e-10;     // rk45 only
  double dt_init = 1e-3;   // rk45 only
  double dt_max = 0.1;     // rk45 only
  double t_max = 100.0;
  double sample_interval = 0.01; // time between recorded samples

  /// Throws std::invalid_argument on non-positive steps or tolerances.
  void validate() const;

  friend bool operator==(const IntegratorConfig &,
                         const IntegratorConfig &) = default;
};

struct TerminationCriteria {
  double tol_edge = 1e-9;  // |m - m*| below this counts as converged
  double tol_node = 1e-6;  // node displacement threshold over the window
  double window = 10.0;    // tail window, time units
  double min_speed = 1e-3; // limit-cycle speed floor

  void validate() const;

  friend bool operator==(const TerminationCriteria &,
                         const TerminationCriteria &) = default;
};

enum class Termination { converged, limit_cycle_suspect, horizon, aborted };
std::string_view to_string(Termination t);

/// Sampled run. measurements[k] is F(positions[k]), recomputed from the
/// positions rather than integrated alongside them.
struct Trajectory {
  int dim = 0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> positions;
  std::vector<Eigen::VectorXd> measurements;
  std::vector<double> edge_error; // |m* - m(t)|
  std::vector<double> speed;      // |u(t)|, NaN where the field failed
  std::vector<double> energy;     // trapezoidal integral of |u|^2
  Termination termination = Termination::horizon;
  double abort_time = 0.0;
  std::string diagnostic;

  std::size_t size() const { return times.size(); }
  Configuration configuration(std::size_t k) const {
    return {dim, positions.at(k)};
  }
  Configuration final_configuration() const { return configuration(size() - 1); }
};

/// Integrates p' = u(p) for the controller, recording a sample every
/// cfg.sample_interval and stopping at the first satisfied criterion:
/// converged, limit-cycle-suspect (heuristic), horizon, or aborted when the
/// model controller loses rank.
Trajectory integrate(const ControllerSpec &spec, const Configuration &p0,
                     const IntegratorConfig &cfg = {},
                     const TerminationCriteria &crit = {});

struct ConvergenceOutcome {
  bool edge_converged = false;
  bool node_converged = false;
  bool congruent = false;
  double final_edge_error = 0.0;
  double tail_displacement = 0.0;       // max node motion over the window
  double congruence_displacement = 0.0; // after optimal alignment to p*
};

inline constexpr double kDefaultCongruenceTolerance = 1e-5;

ConvergenceOutcome detect_convergence(const Trajectory &traj,
                                      const Measurement &m_star,
                                      const Configuration &p_star,
                                      const TerminationCriteria &crit = {},
                                      double congruence_tol =
                                          kDefaultCongruenceTolerance);

/// Largest per-node displacement between sample `last` and every earlier
/// sample within `window` time units of it.
double window_displacement(const Trajectory &traj, std::size_t last,
                           double window);

/// Exponential rate c from a least-squares fit of log |m* - m| against t
/// over the last tail_fraction of the samples. Throws std::domain_error when
/// fewer than three samples are available or an error is not positive.
double decay_rate(const Trajectory &traj, double tail_fraction = 0.5);

/// Trapezoidal integral of |u|^2 over the samples.
double control_energy(const Trajectory &traj);

} // namespace formation
