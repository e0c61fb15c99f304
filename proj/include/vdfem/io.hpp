#pragma once

#include "vdfem/diagnostics.hpp"
#include "vdfem/mesh.hpp"
#include "vdfem/spaces.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vdfem {

class ConfigError : public Error {
public:
  ConfigError(const std::string& what, int line = 0, std::string field = {})
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line(line), field(std::move(field)) {}
  int line;
  /// Qualified key, e.g. "discretization.s"; empty for syntax errors.
  std::string field;
};

/// Everything needed to reproduce one run.
struct RunConfig {
  std::string scenario = "vortex";
  std::string initial_condition = "vortex";

  RectDomain domain{-1.0, 1.0, -1.0, 1.0};
  int nx = 8;
  int ny = 8;

  SpaceKind space = SpaceKind::RT;
  int s = 0;
  int m = 0;

  double dt = 0.00625;
  int n_steps = 80;
  double picard_tol = 1e-13;
  int picard_max = 50;
  bool product_of_means = false;
  /// time.linearization: newton (default) or picard.
  bool newton = true;

  double c1 = 0.0;
  double c2 = 0.0;

  std::optional<Vec2> body_force;

  std::string output_dir = "out";
  int cadence = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses `key = value` lines. `[section]` headers qualify the keys that
/// follow; top-level keys may use either the qualified or the bare name.
/// `#` starts a comment. `time.T` may replace `time.n_steps` when T/dt is an
/// integer. Unspecified keys keep their defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical form: every key, fixed order, shortest round-trip numbers.
std::string print_config(const RunConfig& cfg);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& out) const;
};

void write_csv_table(const CsvTable& table, const std::string& path);

/// Legacy ASCII VTK unstructured grid with three private points per triangle.
/// Point data: `rho` and `u` sampled at the element corners.
void write_vtk(const DiscreteField& u, const DiscreteField& rho, std::ostream& out);
void write_vtk(const State& state, const std::string& path);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);

} // namespace vdfem
