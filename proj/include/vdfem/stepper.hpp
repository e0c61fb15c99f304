#pragma once

#include "vdfem/assembly.hpp"
#include "vdfem/diagnostics.hpp"
#include "vdfem/linsolve.hpp"
#include "vdfem/spaces.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <utility>

namespace vdfem {

/// Momentum average entering the advective term.
enum class MomentumAverage {
  MeanOfProducts, ///< (rho_k u_k + rho_{k+1} u_{k+1}) / 2
  ProductOfMeans, ///< rho_{k+1/2} u_{k+1/2}
};

/// How the velocity equation is linearized inside each fixed-point iterate.
///   Picard: every transport quantity is frozen at the current iterate. The
///     iteration contracts only while dt |u| / h is small.
///   Newton: the projected product u_k . u_{k+1} is kept implicit (it is linear in
///     u_{k+1}) and the momentum slot of a_h and of the alpha term is linearized
///     about the current iterate. The density is still frozen.
/// Both stop on the same increment test and solve the same discrete equations.
enum class Linearization { Picard, Newton };

struct StepConfig {
  double dt = 0.0;
  UpwindConfig upwind;
  double picard_tol = 1e-13;
  int picard_max = 50;
  std::optional<Vec2> body_force;
  MomentumAverage momentum_average = MomentumAverage::MeanOfProducts;
  Linearization linearization = Linearization::Newton;

  void validate() const;
};

struct StepReport {
  int iterations = 0;
  /// Last relative increment max(|du|/|u|, |drho|/|rho|).
  double increment = 0.0;
};

/// Raised when the fixed-point iteration does not reach picard_tol.
class PicardError : public Error {
public:
  PicardError(const std::string& what, int iterations, double increment)
      : Error(what), iterations(iterations), increment(increment) {}
  int iterations;
  double increment;
};

/// Advances (u_k, rho_k) to (u_{k+1}, rho_{k+1}, p_{k+1}) with the
/// energy-conserving midpoint-type scheme. Each fixed-point iterate freezes the
/// transport data at the current guess, solves the linear density equation,
/// then the linear velocity-pressure system with the new density.
///
/// LU factors are cached between solves, so one Stepper must not be stepped
/// from several threads at once.
class Stepper {
public:
  explicit Stepper(Discretization disc);

  const Discretization& discretization() const { return disc_; }

  std::pair<State, StepReport> step(const State& current, const StepConfig& cfg) const;

  /// Zero velocity and pressure, density rho.
  State make_state(DiscreteField u, DiscreteField rho, double t = 0.0) const;

private:
  Discretization disc_;
  SparseMatrix density_mass_;
  SparseMatrix divergence_;
  Vector pressure_mean_;
  Vector pressure_constant_;
  std::unique_ptr<ReusableLU> density_solver_;
  std::unique_ptr<ReusableLU> saddle_solver_;
};

struct RunResult {
  State final_state;
  DiagnosticsSeries series;
};

using StepObserver = std::function<void(int step, const State& state, const StepRecord& record)>;

/// Takes n_steps steps, recording diagnostics for the initial state and after
/// every step. The observer (optional) sees every accepted state, step 0 included.
RunResult run(const Stepper& stepper, State initial, const StepConfig& cfg, int n_steps,
              const StepObserver& observer = {});

} // namespace vdfem
