#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "formation/certificates.hpp"
#include "formation/output.hpp"
#include "formation/rigidity.hpp"
#include "formation/scenario.hpp"
#include "formation/simulation.hpp"

namespace formation::cli {

using json = nlohmann::ordered_json;

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json spectrum_json(const Spectrum &s) {
  json a = json::array();
  for (const auto &z : s)
    a.push_back({z.real(), z.imag()});
  return a;
}

json edges_json(const Graph &g) {
  json a = json::array();
  for (const auto &[x, y] : g.labels())
    a.push_back({x, y});
  return a;
}

void write_json(const std::string &path, const json &j) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << '\n';
}

std::string str(double x) {
  std::ostringstream ss;
  ss << std::setprecision(6) << x;
  return ss.str();
}

int verdict_code(Verdict v) {
  switch (v) {
  case Verdict::pass:
    return kPass;
  case Verdict::fail:
    return kFail;
  case Verdict::indeterminate:
    break;
  }
  return kIndeterminate;
}

json admissibility_json(const AdmissibilityReport &rep, int samples) {
  json per = json::array();
  for (const auto &s : rep.samples)
    per.push_back({{"seed", s.seed},
                   {"attempts", s.attempts},
                   {"regular", s.regular},
                   {"min_abs_real", s.min_abs_real},
                   {"min_abs", s.min_abs},
                   {"spectral_norm", s.spectral_norm},
                   {"hyperbolic", s.hyperbolic},
                   {"invertible", s.invertible}});
  return {{"samples", samples},
          {"seed", rep.seed},
          {"dynamic", std::string(to_string(rep.dynamic))},
          {"algebraic", std::string(to_string(rep.algebraic))},
          {"per_sample", per}};
}

json persistence_json(const PersistenceReport &rep, int d) {
  json j{{"dimension", d},
         {"verdict", std::string(to_string(rep.verdict))},
         {"reductions_total", rep.reductions_total},
         {"reductions_checked", rep.reductions_checked},
         {"flexible_reductions", rep.flexible_reductions}};
  j["witness"] = rep.witness ? edges_json(*rep.witness) : json(nullptr);
  return j;
}

void print_admissibility(std::ostream &out, const AdmissibilityReport &rep) {
  out << "admissibility (" << rep.samples.size() << " samples, seed " << rep.seed
      << "): dynamic " << to_string(rep.dynamic) << ", algebraic "
      << to_string(rep.algebraic) << '\n';
  for (const auto &s : rep.samples)
    out << "  sample seed " << s.seed << ": min|Re l| " << str(s.min_abs_real)
        << ", min|l| " << str(s.min_abs) << ", |A| " << str(s.spectral_norm)
        << '\n';
}

void print_persistence(std::ostream &out, const PersistenceReport &rep) {
  out << "persistence: " << to_string(rep.verdict) << " ("
      << rep.reductions_checked << " of " << rep.reductions_total
      << " reductions checked, " << rep.flexible_reductions << " flexible)\n";
  if (rep.witness) {
    out << "  flexible reduction:";
    for (const auto &[a, b] : rep.witness->labels())
      out << ' ' << a << '-' << b;
    out << '\n';
  }
}

// Graph, orientation and dimension for the graph-level commands.
struct GraphSource {
  std::string builtin;
  std::string file;
  std::optional<int> dimension;

  void add_to(CLI::App *cmd) {
    auto *b = cmd->add_option("--builtin", builtin, "built-in scenario name");
    auto *f = cmd->add_option("--graph", file, "graph JSON file")->check(CLI::ExistingFile);
    b->excludes(f);
    cmd->add_option("--dimension", dimension, "override the dimension")
        ->check(CLI::Range(1, 3));
  }

  GraphInput load() const {
    GraphInput g;
    if (!builtin.empty()) {
      const auto *s = find_builtin(builtin);
      if (!s)
        throw std::runtime_error("unknown built-in '" + builtin + "'");
      g = graph_input_of(*s);
    } else if (!file.empty()) {
      g = load_graph_input(file);
    } else {
      throw std::runtime_error("give --builtin NAME or --graph FILE");
    }
    if (dimension)
      g.dimension = *dimension;
    return g;
  }
};

std::uint64_t seed_or_default(const std::optional<std::uint64_t> &flag) {
  return flag ? *flag : default_seed();
}

int cmd_analyze(const std::string &target, bool with_persistence,
                const std::string &json_path, const std::optional<std::uint64_t> &seed,
                int samples, int jobs, std::ostream &out) {
  const Scenario s = resolve_scenario(target);
  const Graph g = s.graph();
  const auto p_star = s.target_configuration();
  const auto spec = s.controller_spec();

  const int generic = generic_rank(g, s.dimension);
  const int rigid = rigid_rank(s.vertices, s.dimension);
  const bool rigid_graph = generic == rigid;
  const int target_rank = numerical_rank(rigidity_matrix(g, p_star));
  const bool regular = target_rank == generic;

  const auto cert = restricted_sym_form(spec, p_star);
  AdmissibilityOptions aopts;
  aopts.samples = samples;
  aopts.seed = seed_or_default(seed);
  aopts.jobs = jobs;
  const auto adm = admissibility(s.controller, g, s.oriented(), s.dimension, aopts);

  Verdict verdict = cert.verdict;
  if (!rigid_graph)
    verdict = Verdict::fail;
  else if (!regular)
    verdict = Verdict::indeterminate;

  json j;
  j["scenario"] = s.name;
  j["controller"] = std::string(to_string(s.controller));
  j["dimension"] = s.dimension;
  j["vertices"] = s.vertices;
  j["edges"] = g.edge_count();
  j["rigidity"] = {{"generic_rank", generic},
                   {"rigid_rank", rigid},
                   {"generically_rigid", rigid_graph},
                   {"target_rank", target_rank},
                   {"target_regular", regular}};
  j["certificate"] = {{"verdict", std::string(to_string(cert.verdict))},
                      {"min_sym_eigenvalue", finite_or_null(cert.min_sym_eigenvalue)},
                      {"spectral_norm", finite_or_null(cert.spectral_norm)},
                      {"tol_pd", cert.tol_pd},
                      {"tangent_dimension", cert.rank_r},
                      {"diagnostic", cert.diagnostic}};
  if (regular) {
    const bool hurwitz = std::all_of(cert.spectrum.begin(), cert.spectrum.end(),
                                     [](const auto &z) { return z.real() > 0.0; });
    j["linearized"] = {{"eigenvalues", spectrum_json(cert.spectrum)},
                       {"hurwitz", hurwitz}};
  } else {
    j["linearized"] = nullptr;
  }
  j["admissibility"] = admissibility_json(adm, samples);

  out << "scenario " << s.name << " (" << to_string(s.controller) << ", d = "
      << s.dimension << ", n = " << s.vertices << ", |E| = " << g.edge_count()
      << ")\n";
  out << "generic rank " << generic << " of " << rigid << ": "
      << (rigid_graph ? "generically rigid" : "flexible") << '\n';
  out << "target rank " << target_rank << ": "
      << (regular ? "regular" : "not regular") << '\n';
  out << "certificate: " << to_string(cert.verdict) << " (min eig "
      << str(cert.min_sym_eigenvalue) << ", |S| " << str(cert.spectral_norm)
      << ")\n";
  if (regular) {
    out << "linearized spectrum:";
    for (const auto &z : cert.spectrum) {
      out << ' ' << str(z.real());
      if (z.imag() != 0.0)
        out << (z.imag() > 0 ? "+" : "") << str(z.imag()) << 'i';
    }
    out << '\n';
  }
  print_admissibility(out, adm);

  if (with_persistence) {
    if (!s.orientation) {
      j["persistence"] = nullptr;
      out << "persistence: needs an oriented graph\n";
    } else if (s.dimension < 2) {
      j["persistence"] = nullptr;
      out << "persistence: defined for d = 2 or 3 only\n";
    } else {
      PersistenceOptions popts;
      popts.seed = seed_or_default(seed);
      popts.jobs = jobs;
      const auto rep = persistence_check(*s.oriented(), s.dimension, popts);
      j["persistence"] = persistence_json(rep, s.dimension);
      print_persistence(out, rep);
    }
  }
  j["verdict"] = std::string(to_string(verdict));
  out << "verdict: " << to_string(verdict) << '\n';
  if (!json_path.empty())
    write_json(json_path, j);
  return verdict_code(verdict);
}

struct SimulateArgs {
  std::string target;
  std::string csv;
  std::string svg;
  std::string json_path;
  std::optional<std::uint64_t> seed;
  std::string controller;
  std::string integrator;
  std::optional<double> t_max;
};

int cmd_simulate(const SimulateArgs &a, std::ostream &out) {
  Scenario s = resolve_scenario(a.target);
  if (a.seed) {
    if (s.initial.coordinates)
      throw std::runtime_error("--seed given but scenario '" + s.name +
                               "' starts from explicit coordinates");
    s.initial.seed = *a.seed;
  }
  if (!a.controller.empty()) {
    s.controller = parse_controller_kind(a.controller);
    if (s.controller != ControllerKind::directed)
      s.orientation.reset();
  }
  if (!a.integrator.empty())
    s.integrator.method = parse_integrator_method(a.integrator);
  if (a.t_max)
    s.integrator.t_max = *a.t_max;
  s.validate();

  const Graph g = s.graph();
  const auto p_star = s.target_configuration();
  const auto m_star = s.target_measurement();
  const auto traj = integrate(s.controller_spec(), s.initial_configuration(),
                              s.integrator, s.termination);
  const auto outcome = detect_convergence(traj, m_star, p_star, s.termination);
  std::optional<double> rate;
  try {
    rate = decay_rate(traj);
  } catch (const std::domain_error &) {
  }

  const std::string csv = a.csv.empty() ? s.name + ".csv" : a.csv;
  {
    std::ofstream f(csv, std::ios::binary);
    if (!f)
      throw std::runtime_error("cannot write " + csv);
    write_trajectory_csv(f, g, traj);
  }
  std::vector<std::filesystem::path> svgs;
  if (!a.svg.empty())
    svgs = write_trajectory_plots(a.svg, g, traj);

  json j;
  j["scenario"] = s.name;
  j["controller"] = std::string(to_string(s.controller));
  j["integrator"] = std::string(to_string(s.integrator.method));
  j["seed"] = s.initial.coordinates ? json(nullptr) : json(s.initial_seed());
  j["termination"] = std::string(to_string(traj.termination));
  j["final_time"] = traj.times.back();
  j["samples"] = traj.size();
  j["final_edge_error"] = outcome.final_edge_error;
  j["edge_converged"] = outcome.edge_converged;
  j["node_converged"] = outcome.node_converged;
  j["congruent"] = outcome.congruent;
  j["congruence_displacement"] = outcome.congruence_displacement;
  j["tail_displacement"] = outcome.tail_displacement;
  j["energy"] = traj.energy.back();
  j["decay_rate"] = rate ? finite_or_null(*rate) : json(nullptr);
  j["diagnostic"] = traj.diagnostic;
  j["csv"] = csv;
  json svg_list = json::array();
  for (const auto &p : svgs)
    svg_list.push_back(p.string());
  j["svg"] = svg_list;

  out << "scenario " << s.name << " (" << to_string(s.controller) << ", "
      << to_string(s.integrator.method) << ")\n";
  out << "termination: " << to_string(traj.termination) << " at t = "
      << str(traj.times.back()) << " after " << traj.size() << " samples\n";
  if (!traj.diagnostic.empty())
    out << "diagnostic: " << traj.diagnostic << '\n';
  out << "final edge error " << str(outcome.final_edge_error) << ", congruent "
      << (outcome.congruent ? "yes" : "no") << " (displacement "
      << str(outcome.congruence_displacement) << ")\n";
  out << "energy " << str(traj.energy.back());
  if (rate)
    out << ", decay rate " << str(*rate);
  out << '\n' << "wrote " << csv << '\n';
  for (const auto &p : svgs)
    out << "wrote " << p.string() << '\n';
  if (!a.json_path.empty())
    write_json(a.json_path, j);

  switch (traj.termination) {
  case Termination::converged:
    return kPass;
  case Termination::limit_cycle_suspect:
  case Termination::horizon:
    return kFail;
  case Termination::aborted:
    break;
  }
  return kError;
}

int cmd_admissibility(const GraphSource &src, const std::string &controller,
                      int samples, const std::optional<std::uint64_t> &seed,
                      int jobs, const std::string &json_path, std::ostream &out) {
  const GraphInput in = src.load();
  ControllerKind kind = in.orientation ? ControllerKind::directed
                                       : ControllerKind::gradient;
  if (!controller.empty())
    kind = parse_controller_kind(controller);
  if (kind == ControllerKind::directed && !in.orientation)
    throw std::runtime_error("the directed controller needs an orientation");
  const auto o = kind == ControllerKind::directed ? in.oriented() : std::nullopt;

  AdmissibilityOptions opts;
  opts.samples = samples;
  opts.seed = seed_or_default(seed);
  opts.jobs = jobs;
  const auto rep = admissibility(kind, in.graph(), o, in.dimension, opts);

  out << "graph n = " << in.vertices << ", |E| = " << in.graph().edge_count()
      << ", d = " << in.dimension << ", controller " << to_string(kind) << '\n';
  print_admissibility(out, rep);
  if (!json_path.empty()) {
    json j{{"vertices", in.vertices},
           {"edges", edges_json(in.graph())},
           {"dimension", in.dimension},
           {"controller", std::string(to_string(kind))}};
    j["admissibility"] = admissibility_json(rep, samples);
    write_json(json_path, j);
  }
  if (rep.dynamic == Verdict::fail || rep.algebraic == Verdict::fail)
    return kFail;
  if (rep.dynamic == Verdict::pass && rep.algebraic == Verdict::pass)
    return kPass;
  return kIndeterminate;
}

int cmd_persistence(const GraphSource &src, std::size_t cap,
                    const std::optional<std::uint64_t> &seed, int jobs,
                    const std::string &json_path, std::ostream &out) {
  const GraphInput in = src.load();
  if (!in.orientation)
    throw std::runtime_error("persistence needs an oriented graph");
  PersistenceOptions opts;
  opts.cap = cap;
  opts.seed = seed_or_default(seed);
  opts.jobs = jobs;
  const auto rep = persistence_check(*in.oriented(), in.dimension, opts);
  print_persistence(out, rep);
  if (!json_path.empty())
    write_json(json_path, persistence_json(rep, in.dimension));
  switch (rep.verdict) {
  case PersistenceVerdict::persistent:
    return kPass;
  case PersistenceVerdict::not_persistent:
    return kFail;
  case PersistenceVerdict::indeterminate:
    break;
  }
  return kIndeterminate;
}

int cmd_examples(const std::string &dir, std::ostream &out) {
  for (const auto &b : builtin_scenarios())
    out << std::left << std::setw(20) << b.name << b.summary << '\n';
  if (dir.empty())
    return kPass;
  std::filesystem::create_directories(dir);
  for (const auto &b : builtin_scenarios()) {
    const auto path = std::filesystem::path(dir) / (b.name + ".json");
    std::ofstream f(path, std::ios::binary);
    if (!f)
      throw std::runtime_error("cannot write " + path.string());
    f << dump_scenario(b.scenario);
  }
  out << "wrote " << builtin_scenarios().size() << " scenarios to " << dir << '\n';
  return kPass;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"formation control analysis and simulation"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string json_path;

  auto *analyze = app.add_subcommand("analyze", "certificate, spectrum and admissibility report");
  std::string analyze_target;
  bool with_persistence = false;
  int analyze_samples = kDefaultAdmissibilitySamples;
  analyze->add_option("scenario", analyze_target, "built-in name or scenario file")->required();
  analyze->add_flag("--persistence", with_persistence, "also enumerate reductions");
  analyze->add_option("--json", json_path, "write the report here");
  analyze->add_option("--seed", seed, "admissibility sampling seed");
  analyze->add_option("--samples", analyze_samples, "admissibility samples")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto *simulate = app.add_subcommand("simulate", "integrate a scenario");
  SimulateArgs sim;
  simulate->add_option("scenario", sim.target, "built-in name or scenario file")->required();
  simulate->add_option("-o,--output", sim.csv, "trajectory CSV (default <name>.csv)");
  simulate->add_option("--svg", sim.svg, "write plots as <prefix>_*.svg");
  simulate->add_option("--json", sim.json_path, "write the summary here");
  simulate->add_option("--seed", sim.seed, "seed for the perturbed start");
  simulate->add_option("--controller", sim.controller, "gradient, model or directed");
  simulate->add_option("--integrator", sim.integrator, "rk4 or rk45");
  simulate->add_option("--t-max", sim.t_max, "time horizon")->check(CLI::PositiveNumber);

  auto *adm = app.add_subcommand("admissibility", "randomized admissibility test");
  GraphSource adm_src;
  adm_src.add_to(adm);
  std::string adm_controller;
  int adm_samples = kDefaultAdmissibilitySamples;
  adm->add_option("--controller", adm_controller, "gradient, model or directed");
  adm->add_option("--samples", adm_samples, "random targets")->check(CLI::PositiveNumber);
  adm->add_option("--seed", seed, "master seed");
  adm->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  adm->add_option("--json", json_path, "write the report here");

  auto *per = app.add_subcommand("persistence", "check every out-degree reduction");
  GraphSource per_src;
  per_src.add_to(per);
  std::size_t cap = kDefaultPersistenceCap;
  per->add_option("--cap", cap, "give up above this many reductions");
  per->add_option("--seed", seed, "genericity seed");
  per->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  per->add_option("--json", json_path, "write the report here");

  auto *ex = app.add_subcommand("examples", "list built-in scenarios");
  std::string write_dir;
  ex->add_option("--write", write_dir, "write each as <dir>/<name>.json");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kError;
  }

  try {
    if (*analyze)
      return cmd_analyze(analyze_target, with_persistence, json_path, seed,
                         analyze_samples, jobs, out);
    if (*simulate)
      return cmd_simulate(sim, out);
    if (*adm)
      return cmd_admissibility(adm_src, adm_controller, adm_samples, seed, jobs,
                               json_path, out);
    if (*per)
      return cmd_persistence(per_src, cap, seed, jobs, json_path, out);
    if (*ex)
      return cmd_examples(write_dir, out);
  } catch (const ScenarioParseError &e) {
    err << "error: " << e.what() << '\n';
    return kError;
  } catch (const ScenarioValidationError &e) {
    err << "error: invalid scenario: " << e.what() << '\n';
    return kError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

} // namespace formation::cli
