#pragma once

#include "vdfem/io.hpp"
#include "vdfem/stepper.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vdfem {

// Initial data of the two test problems.
Vec2 vortex_velocity(const Vec2& x);
double vortex_density(const Vec2& x);
double rayleigh_taylor_density(const Vec2& x);

/// Smooth vortex on (-1,1)^2, dt = 0.00625, T = 0.5.
RunConfig vortex_config();
/// Heavy-over-light layer on (-1/2,1/2) x (-2,2) with gravity, RT_0 / DG_1 / DG_0,
/// full upwinding, dt = 0.01, T = 1.25, h = 1/32.
RunConfig rayleigh_taylor_config();

Discretization discretization_for(const RunConfig& cfg);
StepConfig step_config(const RunConfig& cfg);

/// Divergence-free L2 projection of the initial velocity and L2 projection of
/// the initial density; zero pressure.
State initial_state(const Discretization& disc, const std::string& initial_condition);

using Progress = std::function<void(const std::string&)>;

struct ScenarioResult {
  State final_state;
  DiagnosticsSeries series;
  std::vector<std::string> files;
};

/// Runs a config. Writes `<dir>/<scenario>_diagnostics.csv` and a VTK file
/// `<dir>/<scenario>_NNNNN.vtk` for every step in `snapshot_steps`, or every
/// `cadence` steps when `snapshot_steps` is empty.
ScenarioResult run_config(const RunConfig& cfg, const std::vector<int>& snapshot_steps = {},
                          const Progress& progress = {});

/// Step indices of the given output times, which must be multiples of dt.
std::vector<int> snapshot_steps(const std::vector<double>& times, double dt);

// ---------------------------------------------------------------------------
// Convergence studies on the vortex problem. Level j uses cell size 2^{-j}
// (a 2^{j+1} x 2^{j+1} grid of right-triangle pairs).

int grid_cells_for_level(int level);

struct ConvergenceSettings {
  SpaceKind space = SpaceKind::RT;
  std::vector<int> degrees{0, 1, 2};
  std::vector<int> levels{0, 1, 2, 3};
  int reference_degree = 2;
  int reference_level = 4;
  double dt = 0.00625;
  double final_time = 0.5;
  UpwindConfig upwind;
  double picard_tol = 1e-13;
  bool newton = true;
};

struct ErrorTriple {
  double u = 0.0;
  double rho = 0.0;
  double p = 0.0;
};

struct ConvergenceRow {
  int s = 0;
  int level = 0;
  double h = 0.0;
  ErrorTriple error;
  std::optional<ErrorTriple> rate; // against the previous level of the same s
};

std::vector<ConvergenceRow> convergence_study(const ConvergenceSettings& settings, const Progress& progress = {});
CsvTable convergence_table(const std::vector<ConvergenceRow>& rows);

struct DtStudySettings {
  SpaceKind space = SpaceKind::RT;
  int s = 2;
  int level = 3;
  std::vector<int> dt_exponents{1, 2, 3, 4};
  int reference_exponent = 6;
  double final_time = 0.5;
  UpwindConfig upwind;
  double picard_tol = 1e-13;
  bool newton = true;
};

struct DtStudyRow {
  int exponent = 0;
  double dt = 0.0;
  ErrorTriple error;
  std::optional<ErrorTriple> rate;
};

std::vector<DtStudyRow> dt_study(const DtStudySettings& settings, const Progress& progress = {});
CsvTable dt_study_table(const std::vector<DtStudyRow>& rows);

/// L2 differences of (u, rho, p) against a reference state on a nested mesh;
/// pressures are compared after removing their means.
ErrorTriple state_errors(const State& coarse, const QuadratureSet& coarse_qs, const State& reference,
                         const QuadratureSet& reference_qs);

} // namespace vdfem
