#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "formation/controllers.hpp"
#include "formation/graph.hpp"
#include "formation/simulation.hpp"

namespace formation {

/// Malformed JSON. `line` is 1-based, 0 when unknown.
class ScenarioParseError : public std::runtime_error {
public:
  ScenarioParseError(const std::string &what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Well-formed JSON that violates the schema; `field` is a dotted path such
/// as "graph.edges[3]".
class ScenarioValidationError : public std::runtime_error {
public:
  ScenarioValidationError(std::string field, const std::string &what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string &field() const { return field_; }

private:
  std::string field_;
};

/// Start either at explicit coordinates or at target + scale * diam * N(0,1).
struct InitialCondition {
  std::optional<std::vector<std::vector<double>>> coordinates;
  std::optional<std::uint64_t> seed; // unset: FORMATION_SEED, then the default
  double relative_scale = 0.1;

  friend bool operator==(const InitialCondition &,
                         const InitialCondition &) = default;
};

struct Scenario {
  std::string name;
  int dimension = 2;
  int vertices = 0;
  std::vector<LabelPair> edges;
  std::optional<std::vector<LabelPair>> orientation; // directed pairs
  std::vector<std::vector<double>> target;
  InitialCondition initial;
  ControllerKind controller = ControllerKind::gradient;
  IntegratorConfig integrator;
  TerminationCriteria termination;

  Graph graph() const;
  std::optional<Orientation> oriented() const;
  Configuration target_configuration() const;
  Measurement target_measurement() const;
  ControllerSpec controller_spec() const;
  /// Seed actually used for a perturbed start.
  std::uint64_t initial_seed() const;
  Configuration initial_configuration() const;

  /// Throws ScenarioValidationError naming the first offending field.
  void validate() const;

  friend bool operator==(const Scenario &, const Scenario &) = default;
};

/// Seed from FORMATION_SEED when set and numeric, else kDefaultSeed.
std::uint64_t default_seed();

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path &path);
/// Pretty-printed JSON with every default written out.
std::string dump_scenario(const Scenario &s);

/// Graph-only input for the admissibility and persistence commands.
struct GraphInput {
  int dimension = 2;
  int vertices = 0;
  std::vector<LabelPair> edges;
  std::optional<std::vector<LabelPair>> orientation;

  Graph graph() const;
  std::optional<Orientation> oriented() const;
};

GraphInput parse_graph_input(std::string_view text);
GraphInput load_graph_input(const std::filesystem::path &path);
GraphInput graph_input_of(const Scenario &s);

struct BuiltinScenario {
  std::string name;
  std::string summary;
  Scenario scenario;
};

const std::vector<BuiltinScenario> &builtin_scenarios();
/// nullptr when there is no such built-in.
const Scenario *find_builtin(std::string_view name);

/// A built-in name or a path to a scenario file.
Scenario resolve_scenario(const std::string &name_or_path);

} // namespace formation
