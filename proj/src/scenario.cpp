#include "formation/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "formation/random.hpp"
#include "formation/rigidity.hpp"

namespace formation {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string &field, const std::string &what) {
  throw ScenarioValidationError(field, what);
}

std::string at(const std::string &path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string idx(const std::string &path, std::size_t k) {
  return path + "[" + std::to_string(k) + "]";
}

void only_keys(const json &obj, const std::string &path,
               std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object())
    bad(path.empty() ? "<root>" : path, "expected an object");
  for (const auto &item : obj.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      bad(at(path, item.key()), "unknown field");
}

const json &required(const json &obj, const std::string &path,
                     std::string_view key) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end())
    bad(at(path, key), "missing required field");
  return *it;
}

double number(const json &j, const std::string &field) {
  if (!j.is_number())
    bad(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v))
    bad(field, "must be finite");
  return v;
}

double positive(const json &j, const std::string &field) {
  const double v = number(j, field);
  if (!(v > 0.0))
    bad(field, "must be positive");
  return v;
}

long long integer(const json &j, const std::string &field) {
  if (!j.is_number_integer())
    bad(field, "expected an integer");
  return j.get<long long>();
}

std::uint64_t unsigned_integer(const json &j, const std::string &field) {
  if (j.is_number_unsigned())
    return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0)
    return static_cast<std::uint64_t>(j.get<long long>());
  bad(field, "expected a non-negative integer");
}

std::string text(const json &j, const std::string &field) {
  if (!j.is_string())
    bad(field, "expected a string");
  return j.get<std::string>();
}

std::vector<LabelPair> pairs(const json &j, const std::string &field) {
  if (!j.is_array())
    bad(field, "expected an array of [a, b] pairs");
  std::vector<LabelPair> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto &p = j[k];
    if (!p.is_array() || p.size() != 2)
      bad(idx(field, k), "expected a pair [a, b]");
    out.emplace_back(static_cast<int>(integer(p[0], idx(field, k))),
                     static_cast<int>(integer(p[1], idx(field, k))));
  }
  return out;
}

std::vector<std::vector<double>> points(const json &j, const std::string &field) {
  if (!j.is_array())
    bad(field, "expected an array of points");
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_array())
      bad(idx(field, k), "expected an array of coordinates");
    std::vector<double> pt;
    for (std::size_t c = 0; c < j[k].size(); ++c)
      pt.push_back(number(j[k][c], idx(idx(field, k), c)));
    out.push_back(std::move(pt));
  }
  return out;
}

json pairs_json(const std::vector<LabelPair> &ps) {
  json a = json::array();
  for (const auto &[x, y] : ps)
    a.push_back({x, y});
  return a;
}

json points_json(const std::vector<std::vector<double>> &pts) {
  json a = json::array();
  for (const auto &p : pts)
    a.push_back(p);
  return a;
}

void check_points(const std::vector<std::vector<double>> &pts, int n, int d,
                  const std::string &field) {
  if (static_cast<int>(pts.size()) != n)
    bad(field, "expected " + std::to_string(n) + " points, got " +
                   std::to_string(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k)
    if (static_cast<int>(pts[k].size()) != d)
      bad(idx(field, k), "expected " + std::to_string(d) + " coordinates");
}

void check_graph(int dimension, int vertices, const std::vector<LabelPair> &edges,
                 const std::optional<std::vector<LabelPair>> &orientation) {
  if (dimension < 1 || dimension > 3)
    bad("dimension", "must be 1, 2 or 3");
  if (vertices < 2)
    bad("graph.vertices", "need at least two vertices");
  if (edges.empty())
    bad("graph.edges", "need at least one edge");
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [a, b] = edges[k];
    if (a < 1 || b < 1 || a > vertices || b > vertices)
      bad(idx("graph.edges", k), "vertex label out of range 1.." +
                                     std::to_string(vertices));
    if (a == b)
      bad(idx("graph.edges", k), "self-loop");
    if (!seen.insert(std::minmax(a, b)).second)
      bad(idx("graph.edges", k), "duplicate edge");
  }
  if (orientation) {
    const auto g = Graph::from_labels(vertices, edges);
    for (std::size_t k = 0; k < orientation->size(); ++k) {
      const auto [a, b] = (*orientation)[k];
      if (a < 1 || b < 1 || a > vertices || b > vertices || a == b ||
          !g.has_edge(a - 1, b - 1))
        bad(idx("orientation", k), "not an edge of the graph");
    }
    try {
      Orientation::from_labels(g, *orientation);
    } catch (const std::invalid_argument &e) {
      bad("orientation", e.what());
    }
  }
}

IntegratorConfig parse_integrator(const json &j) {
  const std::string path = "integrator";
  only_keys(j, path, {"method", "dt", "rtol", "atol", "dt_init", "dt_max",
                      "t_max", "sample_interval"});
  IntegratorConfig c;
  if (j.contains("method")) {
    try {
      c.method = parse_integrator_method(text(j["method"], at(path, "method")));
    } catch (const std::invalid_argument &e) {
      bad(at(path, "method"), e.what());
    }
  }
  const auto read = [&](std::string_view key, double &slot) {
    if (j.contains(std::string(key)))
      slot = positive(j[std::string(key)], at(path, key));
  };
  read("dt", c.dt);
  read("rtol", c.rtol);
  read("atol", c.atol);
  read("dt_init", c.dt_init);
  read("dt_max", c.dt_max);
  read("t_max", c.t_max);
  read("sample_interval", c.sample_interval);
  return c;
}

TerminationCriteria parse_termination(const json &j) {
  const std::string path = "termination";
  only_keys(j, path, {"tol_edge", "tol_node", "window", "min_speed"});
  TerminationCriteria c;
  const auto read = [&](std::string_view key, double &slot) {
    if (j.contains(std::string(key)))
      slot = positive(j[std::string(key)], at(path, key));
  };
  read("tol_edge", c.tol_edge);
  read("tol_node", c.tol_node);
  read("window", c.window);
  read("min_speed", c.min_speed);
  return c;
}

InitialCondition parse_initial(const json &j) {
  const std::string path = "initial";
  only_keys(j, path, {"coordinates", "seed", "relative_scale"});
  InitialCondition ic;
  if (j.contains("coordinates")) {
    if (j.contains("seed") || j.contains("relative_scale"))
      bad(path, "give either coordinates or seed/relative_scale, not both");
    ic.coordinates = points(j["coordinates"], at(path, "coordinates"));
    return ic;
  }
  if (j.contains("seed"))
    ic.seed = unsigned_integer(j["seed"], at(path, "seed"));
  if (j.contains("relative_scale")) {
    ic.relative_scale = number(j["relative_scale"], at(path, "relative_scale"));
    if (ic.relative_scale < 0.0)
      bad(at(path, "relative_scale"), "must be non-negative");
  }
  return ic;
}

json parse_json(std::string_view input) {
  try {
    return json::parse(input.begin(), input.end());
  } catch (const json::parse_error &e) {
    const std::size_t end = std::min<std::size_t>(e.byte, input.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(
                input.begin(), input.begin() + static_cast<std::ptrdiff_t>(
                                                   end > 0 ? end - 1 : 0),
                '\n'));
    throw ScenarioParseError("line " + std::to_string(line) + ": " + e.what(),
                             line);
  }
}

// Like dump(2), but arrays of scalars stay on one line: [1, 2], [0.5, -1].
void compact(const json &j, int depth, std::string &out) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    std::size_t k = 0;
    for (const auto &item : j.items()) {
      out += pad + json(item.key()).dump() + ": ";
      compact(item.value(), depth + 1, out);
      out += ++k < j.size() ? ",\n" : "\n";
    }
    out += close + "}";
  } else if (j.is_array()) {
    const bool flat = std::none_of(j.begin(), j.end(), [](const json &x) {
      return x.is_structured();
    });
    if (flat) {
      out += "[";
      for (std::size_t k = 0; k < j.size(); ++k)
        out += (k ? ", " : "") + j[k].dump();
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      out += pad;
      compact(j[k], depth + 1, out);
      out += k + 1 < j.size() ? ",\n" : "\n";
    }
    out += close + "]";
  } else {
    out += j.dump();
  }
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

std::uint64_t default_seed() {
  const char *env = std::getenv("FORMATION_SEED");
  if (!env || !*env)
    return kDefaultSeed;
  std::uint64_t v = 0;
  const char *end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc{} || ptr != end)
    throw std::invalid_argument("FORMATION_SEED is not an unsigned integer: " +
                                std::string(env));
  return v;
}

Graph Scenario::graph() const { return Graph::from_labels(vertices, edges); }

std::optional<Orientation> Scenario::oriented() const {
  if (!orientation)
    return std::nullopt;
  return Orientation::from_labels(graph(), *orientation);
}

Configuration Scenario::target_configuration() const {
  return Configuration::from_points(target);
}

Measurement Scenario::target_measurement() const {
  return distance_map(graph(), target_configuration());
}

ControllerSpec Scenario::controller_spec() const {
  const auto m = target_measurement();
  switch (controller) {
  case ControllerKind::gradient:
    return ControllerSpec::gradient(graph(), m);
  case ControllerKind::model:
    return ControllerSpec::model(graph(), m);
  case ControllerKind::directed:
    break;
  }
  return ControllerSpec::directed(*oriented(), m);
}

std::uint64_t Scenario::initial_seed() const {
  return initial.seed ? *initial.seed : default_seed();
}

Configuration Scenario::initial_configuration() const {
  if (initial.coordinates)
    return Configuration::from_points(*initial.coordinates);
  const auto p = target_configuration();
  Rng rng(initial_seed());
  return perturb(p, initial.relative_scale * p.diameter(), rng);
}

void Scenario::validate() const {
  if (name.empty())
    bad("name", "must not be empty");
  check_graph(dimension, vertices, edges, orientation);
  if ((controller == ControllerKind::directed) != orientation.has_value())
    bad("orientation", controller == ControllerKind::directed
                           ? "required by the directed controller"
                           : "only allowed with the directed controller");
  check_points(target, vertices, dimension, "target");
  if (initial.coordinates)
    check_points(*initial.coordinates, vertices, dimension, "initial.coordinates");
  if (initial.coordinates && initial.seed)
    bad("initial", "give either coordinates or seed/relative_scale, not both");
  try {
    integrator.validate();
  } catch (const std::invalid_argument &e) {
    bad("integrator", e.what());
  }
  try {
    termination.validate();
  } catch (const std::invalid_argument &e) {
    bad("termination", e.what());
  }
}

Scenario parse_scenario(std::string_view input) {
  const json j = parse_json(input);
  only_keys(j, "", {"name", "dimension", "graph", "orientation", "target",
                    "initial", "controller", "integrator", "termination"});
  Scenario s;
  s.name = text(required(j, "", "name"), "name");
  s.dimension = static_cast<int>(integer(required(j, "", "dimension"), "dimension"));
  const auto &g = required(j, "", "graph");
  only_keys(g, "graph", {"vertices", "edges"});
  s.vertices = static_cast<int>(integer(required(g, "graph", "vertices"), "graph.vertices"));
  s.edges = pairs(required(g, "graph", "edges"), "graph.edges");
  if (j.contains("orientation"))
    s.orientation = pairs(j["orientation"], "orientation");
  s.target = points(required(j, "", "target"), "target");
  if (j.contains("initial"))
    s.initial = parse_initial(j["initial"]);
  const auto kind = text(required(j, "", "controller"), "controller");
  try {
    s.controller = parse_controller_kind(kind);
  } catch (const std::invalid_argument &e) {
    bad("controller", e.what());
  }
  if (j.contains("integrator"))
    s.integrator = parse_integrator(j["integrator"]);
  if (j.contains("termination"))
    s.termination = parse_termination(j["termination"]);
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path &path) {
  return parse_scenario(read_file(path));
}

std::string dump_scenario(const Scenario &s) {
  json j;
  j["name"] = s.name;
  j["dimension"] = s.dimension;
  j["graph"] = {{"vertices", s.vertices}, {"edges", pairs_json(s.edges)}};
  if (s.orientation)
    j["orientation"] = pairs_json(*s.orientation);
  j["target"] = points_json(s.target);
  json init = json::object();
  if (s.initial.coordinates) {
    init["coordinates"] = points_json(*s.initial.coordinates);
  } else {
    if (s.initial.seed)
      init["seed"] = *s.initial.seed;
    init["relative_scale"] = s.initial.relative_scale;
  }
  j["initial"] = init;
  j["controller"] = std::string(to_string(s.controller));
  const auto &c = s.integrator;
  j["integrator"] = {{"method", std::string(to_string(c.method))},
                     {"dt", c.dt},
                     {"rtol", c.rtol},
                     {"atol", c.atol},
                     {"dt_init", c.dt_init},
                     {"dt_max", c.dt_max},
                     {"t_max", c.t_max},
                     {"sample_interval", c.sample_interval}};
  const auto &t = s.termination;
  j["termination"] = {{"tol_edge", t.tol_edge},
                      {"tol_node", t.tol_node},
                      {"window", t.window},
                      {"min_speed", t.min_speed}};
  std::string out;
  compact(j, 0, out);
  return out + "\n";
}

Graph GraphInput::graph() const { return Graph::from_labels(vertices, edges); }

std::optional<Orientation> GraphInput::oriented() const {
  if (!orientation)
    return std::nullopt;
  return Orientation::from_labels(graph(), *orientation);
}

GraphInput parse_graph_input(std::string_view input) {
  const json j = parse_json(input);
  only_keys(j, "", {"dimension", "vertices", "edges", "orientation"});
  GraphInput g;
  if (j.contains("dimension"))
    g.dimension = static_cast<int>(integer(j["dimension"], "dimension"));
  g.vertices = static_cast<int>(integer(required(j, "", "vertices"), "vertices"));
  g.edges = pairs(required(j, "", "edges"), "edges");
  if (j.contains("orientation"))
    g.orientation = pairs(j["orientation"], "orientation");
  try {
    check_graph(g.dimension, g.vertices, g.edges, g.orientation);
  } catch (const ScenarioValidationError &e) {
    // graph files keep vertices/edges at the top level
    std::string field = e.field();
    if (field.rfind("graph.", 0) == 0)
      field.erase(0, 6);
    const std::string what = e.what();
    bad(field, what.substr(e.field().size() + 2));
  }
  return g;
}

GraphInput load_graph_input(const std::filesystem::path &path) {
  return parse_graph_input(read_file(path));
}

GraphInput graph_input_of(const Scenario &s) {
  return {s.dimension, s.vertices, s.edges, s.orientation};
}

namespace {

std::vector<LabelPair> wheel_edges() {
  return {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 5}, {3, 4}, {4, 5}};
}

// Figure orientation: the rim runs 2 -> 3 -> 4 -> 5 -> 2, the hub points at
// 2 and 3 and receives from 4 and 5.
std::vector<LabelPair> wheel_arcs() {
  return {{1, 2}, {1, 3}, {4, 1}, {5, 1}, {2, 3}, {5, 2}, {3, 4}, {4, 5}};
}

std::vector<std::vector<double>> wheel_target() {
  return {{0.0, 0.0}, {-0.5, -0.5}, {-1.0, 1.0}, {2.0 / 3.0, 1.0}, {1.0, -1.0}};
}

Scenario base(std::string name, int n, std::vector<LabelPair> edges,
              std::vector<std::vector<double>> target, ControllerKind kind) {
  Scenario s;
  s.name = std::move(name);
  s.dimension = 2;
  s.vertices = n;
  s.edges = std::move(edges);
  s.target = std::move(target);
  s.controller = kind;
  s.initial.seed = 1;
  s.initial.relative_scale = 0.1;
  return s;
}

std::vector<BuiltinScenario> make_builtins() {
  std::vector<BuiltinScenario> out;

  auto w5 = base("w5-undirected", 5, wheel_edges(), wheel_target(),
                 ControllerKind::gradient);
  out.push_back({w5.name, "wheel W5 at p*, gradient controller", w5});

  auto good = base("w5-directed-good", 5, wheel_edges(), wheel_target(),
                   ControllerKind::directed);
  good.orientation = wheel_arcs();
  out.push_back({good.name, "directed W5 at p*, certificate holds", good});

  auto bad_target = wheel_target();
  bad_target[0] = {9.0 / 5.0, -5.0 / 3.0};
  auto badw = base("w5-directed-bad", 5, wheel_edges(), bad_target,
                   ControllerKind::directed);
  badw.orientation = wheel_arcs();
  badw.integrator.t_max = 300.0;
  out.push_back({badw.name, "directed W5 at q*, certificate fails", badw});

  const std::vector<LabelPair> fig4_arcs{{2, 1}, {3, 1}, {3, 5}, {4, 2},
                                         {4, 3}, {5, 1}, {5, 6}, {6, 2},
                                         {6, 4}, {3, 2}, {5, 2}};
  auto fig4 = base("fig4-nonpersistent", 6, fig4_arcs,
                   {{0.11, -1.03}, {-0.91, -0.11}, {1.44, 1.64},
                    {0.35, -1.99}, {-1.87, 1.53}, {1.61, 0.77}},
                   ControllerKind::directed);
  fig4.orientation = fig4_arcs;
  out.push_back({fig4.name, "6 agents, not persistent yet certified", fig4});

  auto tri = base("triangle-cyclic", 3, {{1, 2}, {2, 3}, {1, 3}},
                  {{0.0, 0.0}, {1.0, 0.0}, {0.3, 0.9}}, ControllerKind::directed);
  tri.orientation = std::vector<LabelPair>{{1, 2}, {2, 3}, {3, 1}};
  out.push_back({tri.name, "cyclic triangle", tri});

  const double h = std::sqrt(3.0) / 2.0;
  auto sq = base("square-flex", 4, {{1, 2}, {2, 3}, {3, 4}, {1, 4}},
                 {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}},
                 ControllerKind::gradient);
  sq.initial = InitialCondition{};
  sq.initial.coordinates =
      std::vector<std::vector<double>>{{0.0, 0.0}, {1.0, 0.0}, {1.5, h}, {0.5, h}};
  out.push_back({sq.name, "4-cycle started at a rhombus with the right edge lengths", sq});

  for (const auto &b : out)
    b.scenario.validate();
  return out;
}

} // namespace

const std::vector<BuiltinScenario> &builtin_scenarios() {
  static const std::vector<BuiltinScenario> all = make_builtins();
  return all;
}

const Scenario *find_builtin(std::string_view name) {
  for (const auto &b : builtin_scenarios())
    if (b.name == name)
      return &b.scenario;
  return nullptr;
}

Scenario resolve_scenario(const std::string &name_or_path) {
  if (const auto *s = find_builtin(name_or_path))
    return *s;
  if (!std::filesystem::exists(name_or_path))
    throw std::runtime_error("'" + name_or_path +
                             "' is neither a built-in scenario nor a file");
  return load_scenario(name_or_path);
}

} // namespace formation
