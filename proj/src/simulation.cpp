#include "formation/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "formation/rigidity.hpp"

namespace formation {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

Eigen::Map<const Eigen::VectorXd> as_eigen(const State &x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

struct FieldSystem {
  const ControllerSpec *spec;
  int dim;

  void operator()(const State &x, State &dxdt, double /*t*/) const {
    const Configuration p(dim, Eigen::VectorXd(as_eigen(x)));
    const auto f = evaluate_field(*spec, p);
    dxdt.assign(f.u.data(), f.u.data() + f.u.size());
  }
};

class Recorder {
public:
  Recorder(const ControllerSpec &spec, const TerminationCriteria &crit,
           const IntegratorConfig &cfg, Trajectory &traj)
      : spec_(spec), crit_(crit), traj_(traj),
        limit_stride_(std::max<std::size_t>(
            1, static_cast<std::size_t>(crit.window / cfg.sample_interval / 20))) {}

  // Records the state at time t; returns true when the run should stop.
  bool record(double t, const State &x) {
    Eigen::VectorXd pos = as_eigen(x);
    const Configuration p(traj_.dim, pos);
    Eigen::VectorXd m = distance_map(spec_.graph, p).values;
    // A state where the field is undefined is still recorded, with NaN speed,
    // so an aborted run ends at the offending configuration.
    FieldEvaluation f;
    try {
      f = evaluate_field(spec_, p);
    } catch (const std::exception &) {
      traj_.times.push_back(t);
      traj_.edge_error.push_back((spec_.target.values - m).norm());
      traj_.positions.push_back(std::move(pos));
      traj_.measurements.push_back(std::move(m));
      traj_.speed.push_back(std::numeric_limits<double>::quiet_NaN());
      traj_.energy.push_back(traj_.energy.empty() ? 0.0 : traj_.energy.back());
      throw;
    }

    const double speed = f.u.norm();
    double energy = 0.0;
    if (!traj_.times.empty()) {
      const double prev = traj_.speed.back();
      energy = traj_.energy.back() +
               0.5 * (prev * prev + speed * speed) * (t - traj_.times.back());
    }
    traj_.times.push_back(t);
    traj_.edge_error.push_back((spec_.target.values - m).norm());
    traj_.positions.push_back(std::move(pos));
    traj_.measurements.push_back(std::move(m));
    traj_.speed.push_back(speed);
    traj_.energy.push_back(energy);
    return check();
  }

private:
  bool check() {
    const std::size_t k = traj_.size() - 1;
    const double err = traj_.edge_error[k];
    // the displacement test only means something once a full window exists
    if (err < crit_.tol_edge && traj_.times[k] >= crit_.window &&
        traj_.speed[k] * crit_.window < crit_.tol_node &&
        window_displacement(traj_, k, crit_.window) < crit_.tol_node) {
      traj_.termination = Termination::converged;
      return true;
    }
    if (k % limit_stride_ != 0 || traj_.times[k] < crit_.window)
      return false;
    // Limit-cycle heuristic: edge error has levelled off while the nodes
    // keep moving.
    const double start = traj_.times[k] - crit_.window;
    double lo = err, hi = err, sum = 0.0, speed_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = k + 1; j-- > 0 && traj_.times[j] >= start;) {
      lo = std::min(lo, traj_.edge_error[j]);
      hi = std::max(hi, traj_.edge_error[j]);
      sum += traj_.edge_error[j];
      speed_sum += traj_.speed[j];
      ++count;
    }
    const double mean = sum / static_cast<double>(count);
    const double mean_speed = speed_sum / static_cast<double>(count);
    if (hi - lo < 0.1 * mean && mean_speed > crit_.min_speed &&
        window_displacement(traj_, k, crit_.window) > crit_.tol_node) {
      traj_.termination = Termination::limit_cycle_suspect;
      return true;
    }
    return false;
  }

  const ControllerSpec &spec_;
  const TerminationCriteria &crit_;
  Trajectory &traj_;
  std::size_t limit_stride_;
};

// Advances x from t to t_end with the configured stepper.
template <typename Stepper>
void advance_fixed(Stepper &stepper, const FieldSystem &sys, State &x,
                   double t, double t_end, double dt) {
  while (t < t_end) {
    const double h = std::min(dt, t_end - t);
    stepper.do_step(sys, x, t, h);
    t = (t_end - t - h <= 1e-12 * std::max(1.0, t_end)) ? t_end : t + h;
  }
}

template <typename Stepper>
void advance_adaptive(Stepper &stepper, const FieldSystem &sys, State &x,
                      double t, double t_end, double &dt,
                      const IntegratorConfig &cfg) {
  while (t_end - t > 1e-12 * std::max(1.0, t_end)) {
    double h = std::min({dt, cfg.dt_max, t_end - t});
    const bool clamped = h < dt;
    if (stepper.try_step(sys, x, t, h) == odeint::success) {
      // keep the unclamped step size when we only shortened it to hit a
      // sample time
      dt = clamped ? std::max(dt, h) : h;
    } else {
      dt = h;
      if (dt < 1e-14 * std::max(1.0, t_end))
        throw std::runtime_error("step size underflow at t = " +
                                 std::to_string(t));
    }
  }
}

} // namespace

std::string_view to_string(IntegratorMethod m) {
  return m == IntegratorMethod::rk4 ? "rk4" : "rk45";
}

IntegratorMethod parse_integrator_method(std::string_view name) {
  if (name == "rk4")
    return IntegratorMethod::rk4;
  if (name == "rk45")
    return IntegratorMethod::rk45;
  throw std::invalid_argument("unknown integrator '" + std::string(name) +
                              "' (expected rk4 or rk45)");
}

std::string_view to_string(Termination t) {
  switch (t) {
  case Termination::converged:
    return "converged";
  case Termination::limit_cycle_suspect:
    return "limit-cycle-suspect";
  case Termination::horizon:
    return "horizon";
  case Termination::aborted:
    return "aborted";
  }
  return "unknown";
}

void IntegratorConfig::validate() const {
  if (!(t_max > 0.0))
    throw std::invalid_argument("t_max must be positive");
  if (!(sample_interval > 0.0))
    throw std::invalid_argument("sample_interval must be positive");
  if (method == IntegratorMethod::rk4 && !(dt > 0.0))
    throw std::invalid_argument("dt must be positive");
  if (method == IntegratorMethod::rk45 &&
      !(rtol > 0.0 && atol > 0.0 && dt_init > 0.0 && dt_max > 0.0))
    throw std::invalid_argument("rtol, atol, dt_init and dt_max must be positive");
}

void TerminationCriteria::validate() const {
  if (!(tol_edge > 0.0 && tol_node > 0.0 && window > 0.0 && min_speed > 0.0))
    throw std::invalid_argument("termination thresholds must be positive");
}

Trajectory integrate(const ControllerSpec &spec, const Configuration &p0,
                     const IntegratorConfig &cfg,
                     const TerminationCriteria &crit) {
  spec.validate();
  cfg.validate();
  crit.validate();
  require_compatible(spec.graph, p0);

  Trajectory traj;
  traj.dim = p0.dim();
  const FieldSystem sys{&spec, p0.dim()};
  Recorder recorder(spec, crit, cfg, traj);
  State x(p0.coords().data(), p0.coords().data() + p0.coords().size());

  odeint::runge_kutta4<State> rk4;
  auto dopri = odeint::make_controlled(cfg.atol, cfg.rtol,
                                       odeint::runge_kutta_dopri5<State>());
  double dt = cfg.dt_init;
  double t = 0.0;
  try {
    if (recorder.record(t, x))
      return traj;
    for (std::size_t k = 1;; ++k) {
      const double t_next =
          std::min(cfg.t_max, static_cast<double>(k) * cfg.sample_interval);
      if (cfg.method == IntegratorMethod::rk4)
        advance_fixed(rk4, sys, x, t, t_next, cfg.dt);
      else
        advance_adaptive(dopri, sys, x, t, t_next, dt, cfg);
      t = t_next;
      if (recorder.record(t, x))
        return traj;
      if (t >= cfg.t_max) {
        traj.termination = Termination::horizon;
        return traj;
      }
    }
  } catch (const RankDeficiencyError &err) {
    traj.termination = Termination::aborted;
    traj.abort_time = t;
    traj.diagnostic = err.what();
  } catch (const std::runtime_error &err) {
    traj.termination = Termination::aborted;
    traj.abort_time = t;
    traj.diagnostic = err.what();
  }
  return traj;
}

double window_displacement(const Trajectory &traj, std::size_t last,
                           double window) {
  const int d = traj.dim;
  const Eigen::VectorXd &ref = traj.positions.at(last);
  const Eigen::Index n = ref.size() / d;
  const double start = traj.times[last] - window;
  double worst = 0.0;
  for (std::size_t j = last; j-- > 0 && traj.times[j] >= start;) {
    const Eigen::VectorXd diff = traj.positions[j] - ref;
    for (Eigen::Index i = 0; i < n; ++i)
      worst = std::max(worst, diff.segment(i * d, d).norm());
  }
  return worst;
}

ConvergenceOutcome detect_convergence(const Trajectory &traj,
                                      const Measurement &m_star,
                                      const Configuration &p_star,
                                      const TerminationCriteria &crit,
                                      double congruence_tol) {
  if (traj.size() == 0)
    throw std::invalid_argument("empty trajectory");
  ConvergenceOutcome out;
  const std::size_t last = traj.size() - 1;
  out.final_edge_error = (m_star.values - traj.measurements[last]).norm();
  out.edge_converged = out.final_edge_error < crit.tol_edge;
  out.tail_displacement = window_displacement(traj, last, crit.window);
  out.node_converged = out.tail_displacement < crit.tol_node;
  const auto cong =
      congruence_check(p_star, traj.final_configuration(), congruence_tol);
  out.congruent = cong.congruent;
  out.congruence_displacement = cong.displacement;
  return out;
}

double decay_rate(const Trajectory &traj, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw std::invalid_argument("tail_fraction must lie in (0, 1]");
  const std::size_t n = traj.size();
  const auto count = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(n)));
  if (count < 3)
    throw std::domain_error("window too short to fit a decay rate");
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t k = n - count; k < n; ++k) {
    if (!(traj.edge_error[k] > 0.0))
      throw std::domain_error("edge error is not positive over the window");
    const double t = traj.times[k];
    const double y = std::log(traj.edge_error[k]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double c = static_cast<double>(count);
  const double denom = c * stt - st * st;
  if (!(denom > 0.0))
    throw std::domain_error("window has no time extent");
  return -(c * sty - st * sy) / denom;
}

double control_energy(const Trajectory &traj) {
  if (traj.size() == 0)
    throw std::invalid_argument("empty trajectory");
  double e = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double a = traj.speed[k - 1], b = traj.speed[k];
    if (!std::isfinite(a) || !std::isfinite(b))
      continue;
    e += 0.5 * (a * a + b * b) * (traj.times[k] - traj.times[k - 1]);
  }
  return e;
}

} // namespace formation
