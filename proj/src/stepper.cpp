#include "vdfem/stepper.hpp"

#include "vdfem/linsolve.hpp"

#include <cmath>
#include <sstream>

namespace vdfem {

namespace {

double relative_increment(const Vector& next, const Vector& prev) {
  const double d = (next - prev).norm();
  const double n = next.norm();
  return n > 0.0 ? d / n : d;
}

} // namespace

void StepConfig::validate() const {
  if (!(dt > 0.0))
    throw Error("StepConfig: dt must be positive");
  if (!(picard_tol >= 1e-14))
    throw Error("StepConfig: picard_tol must be >= 1e-14");
  if (picard_max < 1)
    throw Error("StepConfig: picard_max must be >= 1");
  upwind.validate();
}

Stepper::Stepper(Discretization disc)
    : disc_(std::move(disc)), density_solver_(std::make_unique<ReusableLU>()),
      saddle_solver_(std::make_unique<ReusableLU>()) {
  const QuadratureSet& qs = *disc_.quad;
  density_mass_ = assemble_mass(*disc_.density, qs);
  divergence_ = assemble_div_coupling(*disc_.velocity, *disc_.pressure, qs);
  pressure_mean_ = pressure_mean_weights(*disc_.pressure, qs);
  pressure_constant_ = constant_coefficients(*disc_.pressure, qs);
}

State Stepper::make_state(DiscreteField u, DiscreteField rho, double t) const {
  return State{std::move(u), std::move(rho), DiscreteField(disc_.pressure), t};
}

std::pair<State, StepReport> Stepper::step(const State& current, const StepConfig& cfg) const {
  cfg.validate();
  const QuadratureSet& qs = *disc_.quad;
  const FESpace& U = *disc_.velocity;
  const FESpace& F = *disc_.density;
  const double dt = cfg.dt;

  const DiscreteField& u0 = current.u;
  const DiscreteField& rho0 = current.rho;
  DiscreteField u1 = u0;
  DiscreteField rho1 = rho0;
  DiscreteField p1 = current.p;
  DiscreteField u_mid(disc_.velocity);
  DiscreteField rho_mid(disc_.density);

  const Vector weighted_old = assemble_weighted_velocity_mass(evaluator(rho0, qs), U, qs) * u0.coeffs();
  const auto u0_eval = vector_evaluator(u0, qs);
  const auto rho0_eval = evaluator(rho0, qs);
  const auto u1_eval = vector_evaluator(u1, qs);
  const auto rho1_eval = evaluator(rho1, qs);
  const auto umid_eval = vector_evaluator(u_mid, qs);
  const auto rhomid_eval = evaluator(rho_mid, qs);

  VectorEvaluator rhou_mid;
  if (cfg.momentum_average == MomentumAverage::MeanOfProducts)
    rhou_mid = [&](int k, int set) -> DenseMatrix {
      return 0.5 * (rho0_eval(k, set).asDiagonal() * u0_eval(k, set) + rho1_eval(k, set).asDiagonal() * u1_eval(k, set));
    };
  else
    rhou_mid = [&](int k, int set) -> DenseMatrix { return rhomid_eval(k, set).asDiagonal() * umid_eval(k, set); };

  const ScalarEvaluator dot_product = [&](int k, int set) -> Vector {
    return (u0_eval(k, set).cwiseProduct(u1_eval(k, set))).rowwise().sum();
  };

  const bool newton = cfg.linearization == Linearization::Newton;
  SparseMatrix product;
  if (newton)
    product = assemble_product_projection(u0_eval, U, F, qs);

  StepReport report;
  for (int it = 1; it <= cfg.picard_max; ++it) {
    u_mid.coeffs() = 0.5 * (u0.coeffs() + u1.coeffs());

    // Density: (M/dt - B^T/2 + S/2) rho1 = (M/dt + B^T/2 - S/2) rho0
    const SparseMatrix B = assemble_b(umid_eval, F, F, qs);
    const SparseMatrix S = assemble_upwind_density(umid_eval, cfg.upwind, F, qs);
    const SparseMatrix transport = SparseMatrix(B.transpose()) - S;
    const SparseMatrix lhs_rho = density_mass_ / dt - 0.5 * transport;
    const Vector rhs_rho = density_mass_ * rho0.coeffs() / dt + 0.5 * (transport * rho0.coeffs());
    const Vector rho_next = density_solver_->solve(lhs_rho, rhs_rho, rho1.coeffs(), "density solve");
    const double inc_rho = relative_increment(rho_next, rho1.coeffs());
    rho1.coeffs() = rho_next;
    rho_mid.coeffs() = 0.5 * (rho0.coeffs() + rho1.coeffs());

    // Momentum with density frozen at the new iterate.
    SparseMatrix advect = assemble_a(rhou_mid, U, qs);
    Vector rhs_u = weighted_old / dt;
    SparseMatrix newton_block;
    if (!newton) {
      const DiscreteField kdot = l2_project_scalar(dot_product, disc_.density, qs);
      rhs_u += 0.5 * assemble_b_transpose_load(kdot, rhomid_eval, U, qs);
      if (cfg.upwind.enabled()) {
        const UpwindMomentum up =
            assemble_upwind_momentum(umid_eval, rhomid_eval, rhou_mid, evaluator(kdot, qs), cfg.upwind, U, qs);
        advect += up.alpha;
        rhs_u -= up.beta;
      }
    } else {
      // kdot = P u_{k+1}, so its load terms move to the left as -(T/2 - K) P.
      SparseMatrix load = 0.5 * assemble_b_transpose(rhomid_eval, F, U, qs);
      // d(rho u)_mid / du_{k+1} = rho_w.
      const ScalarEvaluator rho_w = [&](int k, int set) -> Vector {
        return 0.5 * (cfg.momentum_average == MomentumAverage::MeanOfProducts ? rho1_eval(k, set)
                                                                              : rhomid_eval(k, set));
      };
      SparseMatrix slot = assemble_a_momentum_slot(rho_w, u_mid, qs);
      if (cfg.upwind.enabled()) {
        const UpwindConfig alpha_only{cfg.upwind.c1, 0.0};
        advect += assemble_upwind_momentum(umid_eval, rhomid_eval, rhou_mid, {}, alpha_only, U, qs).alpha;
        load -= assemble_upwind_kdot(umid_eval, rhomid_eval, cfg.upwind, F, U, qs);
        slot += assemble_upwind_momentum_slot(umid_eval, rho_w, u_mid, cfg.upwind, qs);
      }
      rhs_u += slot * u1.coeffs();
      newton_block = slot - SparseMatrix(load * product);
    }
    if (cfg.body_force)
      rhs_u += assemble_body_force(*cfg.body_force, rhomid_eval, U, qs);
    rhs_u -= 0.5 * (advect * u0.coeffs());

    SaddleSystem sys;
    sys.velocity_block = assemble_weighted_velocity_mass(rho1_eval, U, qs) / dt + 0.5 * advect;
    if (newton)
      sys.velocity_block += newton_block;
    sys.divergence = divergence_;
    sys.rhs_u = std::move(rhs_u);
    sys.rhs_p = Vector::Zero(disc_.pressure->global_dim());
    sys.pressure_mean = pressure_mean_;
    sys.pressure_constant = pressure_constant_;
    sys.constrained = &U.constrained_dofs();
    const SaddleSolution guess{u1.coeffs(), p1.coeffs(), 0.0};
    SaddleSolution sol = solve_saddle(sys, saddle_solver_.get(), &guess);

    const double inc_u = relative_increment(sol.u, u1.coeffs());
    u1.coeffs() = std::move(sol.u);
    p1.coeffs() = std::move(sol.p);

    report.iterations = it;
    report.increment = std::max(inc_u, inc_rho);
    if (report.increment <= cfg.picard_tol)
      return {State{std::move(u1), std::move(rho1), std::move(p1), current.t + dt}, report};
  }
  std::ostringstream msg;
  msg << "fixed-point iteration did not converge in " << cfg.picard_max << " iterations at t = " << current.t
      << " (last relative increment " << report.increment << ")";
  throw PicardError(msg.str(), report.iterations, report.increment);
}

RunResult run(const Stepper& stepper, State initial, const StepConfig& cfg, int n_steps, const StepObserver& observer) {
  const QuadratureSet& qs = *stepper.discretization().quad;
  const double t0 = initial.t;
  RunResult result{std::move(initial), {}};
  result.series.records.push_back(make_record(result.final_state, qs, 0));
  if (observer)
    observer(0, result.final_state, result.series.records.back());
  for (int n = 1; n <= n_steps; ++n) {
    auto [next, report] = stepper.step(result.final_state, cfg);
    result.final_state = std::move(next);
    // Times as t0 + n dt, so output times do not pick up rounding drift.
    result.final_state.t = t0 + n * cfg.dt;
    result.series.records.push_back(make_record(result.final_state, qs, report.iterations));
    if (observer)
      observer(n, result.final_state, result.series.records.back());
  }
  return result;
}

} // namespace vdfem
