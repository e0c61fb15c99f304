#include "vdfem/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace vdfem {

using std::numbers::pi;

Vec2 vortex_velocity(const Vec2& x) {
  return {-std::cos(pi * x.x() / 2) * std::sin(pi * x.y() / 2), std::sin(pi * x.x() / 2) * std::cos(pi * x.y() / 2)};
}

double vortex_density(const Vec2& x) { return 2.0 + std::sin(x.x() * x.y()); }

double rayleigh_taylor_density(const Vec2& x) {
  return 2.0 + std::tanh((x.y() + 0.1 * std::cos(2 * pi * x.x())) / 0.1);
}

RunConfig vortex_config() {
  RunConfig cfg;
  cfg.scenario = "vortex";
  cfg.initial_condition = "vortex";
  cfg.domain = {-1.0, 1.0, -1.0, 1.0};
  cfg.nx = cfg.ny = 8;
  cfg.dt = 0.00625;
  cfg.n_steps = 80;
  return cfg;
}

RunConfig rayleigh_taylor_config() {
  RunConfig cfg;
  cfg.scenario = "rayleigh-taylor";
  cfg.initial_condition = "rayleigh-taylor";
  cfg.domain = {-0.5, 0.5, -2.0, 2.0};
  cfg.nx = 32;
  cfg.ny = 128;
  cfg.space = SpaceKind::RT;
  cfg.s = 0;
  cfg.m = 1;
  cfg.dt = 0.01;
  cfg.n_steps = 125;
  cfg.c1 = cfg.c2 = 0.5;
  cfg.body_force = Vec2(0.0, -10.0);
  cfg.cadence = 5;
  return cfg;
}

Discretization discretization_for(const RunConfig& cfg) {
  cfg.validate();
  auto mesh = std::make_shared<const Mesh>(build_uniform_rect_mesh(cfg.domain, cfg.nx, cfg.ny));
  return make_discretization(std::move(mesh), cfg.space, cfg.s, cfg.m);
}

StepConfig step_config(const RunConfig& cfg) {
  StepConfig sc;
  sc.dt = cfg.dt;
  sc.upwind = {cfg.c1, cfg.c2};
  sc.picard_tol = cfg.picard_tol;
  sc.picard_max = cfg.picard_max;
  sc.body_force = cfg.body_force;
  sc.momentum_average = cfg.product_of_means ? MomentumAverage::ProductOfMeans : MomentumAverage::MeanOfProducts;
  sc.linearization = cfg.newton ? Linearization::Newton : Linearization::Picard;
  return sc;
}

State initial_state(const Discretization& disc, const std::string& initial_condition) {
  const QuadratureSet& qs = *disc.quad;
  std::function<Vec2(const Vec2&)> u0;
  std::function<double(const Vec2&)> rho0;
  if (initial_condition == "vortex") {
    u0 = vortex_velocity;
    rho0 = vortex_density;
  } else if (initial_condition == "rayleigh-taylor") {
    u0 = [](const Vec2&) { return Vec2(0.0, 0.0); };
    rho0 = rayleigh_taylor_density;
  } else {
    throw Error("unknown initial condition '" + initial_condition + "'");
  }
  DiscreteField u = project_velocity_divfree(analytic_vector(u0, *disc.mesh, qs), disc.velocity, disc.pressure, qs);
  DiscreteField rho = l2_project_scalar(analytic(rho0, *disc.mesh, qs), disc.density, qs);
  return State{std::move(u), std::move(rho), DiscreteField(disc.pressure), 0.0};
}

std::vector<int> snapshot_steps(const std::vector<double>& times, double dt) {
  std::vector<int> steps;
  for (double t : times) {
    const double n = std::round(t / dt);
    if (std::abs(t / dt - n) > 1e-9 * std::max(1.0, n) || n < 0)
      throw Error("snapshot time is not a multiple of dt");
    steps.push_back(static_cast<int>(n));
  }
  return steps;
}

ScenarioResult run_config(const RunConfig& cfg, const std::vector<int>& snapshots, const Progress& progress) {
  const Discretization disc = discretization_for(cfg);
  const Stepper stepper(disc);
  const StepConfig sc = step_config(cfg);
  ScenarioResult out{initial_state(disc, cfg.initial_condition), {}, {}};

  const std::string base = cfg.output_dir + "/" + cfg.scenario;
  auto wanted = [&](int n) {
    if (snapshots.empty())
      return n % cfg.cadence == 0 || n == cfg.n_steps;
    return std::find(snapshots.begin(), snapshots.end(), n) != snapshots.end();
  };
  int last_step = 0;
  auto observer = [&](int n, const State& state, const StepRecord& rec) {
    last_step = n;
    if (wanted(n)) {
      char name[32];
      std::snprintf(name, sizeof name, "_%05d.vtk", n);
      out.files.push_back(base + name);
      write_vtk(state, out.files.back());
    }
    if (progress && n > 0) {
      std::ostringstream msg;
      msg << cfg.scenario << " step " << n << "/" << cfg.n_steps << " t=" << rec.t
          << " picard=" << rec.picard_iterations;
      progress(msg.str());
    }
  };
  try {
    RunResult r = run(stepper, out.final_state, sc, cfg.n_steps, observer);
    out.final_state = std::move(r.final_state);
    out.series = std::move(r.series);
  } catch (const PicardError& e) {
    throw Error(cfg.scenario + ": step " + std::to_string(last_step + 1) + ": " + e.what());
  }
  std::ostringstream csv;
  out.series.write_csv(csv);
  out.files.push_back(base + "_diagnostics.csv");
  write_text_file(out.files.back(), csv.str());
  return out;
}

int grid_cells_for_level(int level) {
  if (level < 0 || level > 8)
    throw Error("grid level out of range");
  return 1 << (level + 1);
}

namespace {

struct VortexRun {
  Discretization disc;
  State state;
};

VortexRun run_vortex(SpaceKind space, int s, int level, double dt, int n_steps, const UpwindConfig& upwind,
                     double picard_tol, bool newton) {
  RunConfig cfg = vortex_config();
  cfg.space = space;
  cfg.s = s;
  cfg.m = s;
  cfg.nx = cfg.ny = grid_cells_for_level(level);
  cfg.dt = dt;
  cfg.n_steps = n_steps;
  cfg.c1 = upwind.c1;
  cfg.c2 = upwind.c2;
  cfg.picard_tol = picard_tol;
  cfg.newton = newton;
  Discretization disc = discretization_for(cfg);
  const Stepper stepper(disc);
  RunResult r = run(stepper, initial_state(disc, cfg.initial_condition), step_config(cfg), n_steps);
  return {std::move(disc), std::move(r.final_state)};
}

int steps_for(double final_time, double dt) { return snapshot_steps({final_time}, dt).front(); }

ErrorTriple rates(const ErrorTriple& a, const ErrorTriple& b, double ha, double hb) {
  auto rate = [&](double ea, double eb) { return observed_order({ea, eb}, {ha, hb}).front(); };
  return {rate(a.u, b.u), rate(a.rho, b.rho), rate(a.p, b.p)};
}

std::vector<std::string> error_cells(const ErrorTriple& e) {
  return {format_double(e.u), format_double(e.rho), format_double(e.p)};
}

std::vector<std::string> rate_cells(const std::optional<ErrorTriple>& r) {
  if (!r)
    return {"", "", ""};
  return error_cells(*r);
}

} // namespace

ErrorTriple state_errors(const State& coarse, const QuadratureSet& coarse_qs, const State& reference,
                         const QuadratureSet& reference_qs) {
  return {l2_difference(coarse.u, reference.u, reference_qs, coarse_qs),
          l2_difference(coarse.rho, reference.rho, reference_qs, coarse_qs),
          l2_difference(coarse.p, reference.p, reference_qs, coarse_qs, true)};
}

std::vector<ConvergenceRow> convergence_study(const ConvergenceSettings& st, const Progress& progress) {
  const int n_steps = steps_for(st.final_time, st.dt);
  if (progress)
    progress("reference run: s=" + std::to_string(st.reference_degree) + " level " +
             std::to_string(st.reference_level));
  const VortexRun ref =
      run_vortex(st.space, st.reference_degree, st.reference_level, st.dt, n_steps, st.upwind, st.picard_tol, st.newton);

  std::vector<ConvergenceRow> rows;
  for (int s : st.degrees) {
    const ConvergenceRow* prev = nullptr;
    for (int level : st.levels) {
      if (progress)
        progress("run: s=" + std::to_string(s) + " level " + std::to_string(level));
      const VortexRun run = run_vortex(st.space, s, level, st.dt, n_steps, st.upwind, st.picard_tol, st.newton);
      ConvergenceRow row;
      row.s = s;
      row.level = level;
      row.h = std::ldexp(1.0, -level);
      row.error = state_errors(run.state, *run.disc.quad, ref.state, *ref.disc.quad);
      if (prev)
        row.rate = rates(prev->error, row.error, prev->h, row.h);
      rows.push_back(row);
      prev = &rows.back();
    }
  }
  return rows;
}

CsvTable convergence_table(const std::vector<ConvergenceRow>& rows) {
  CsvTable t;
  t.header = {"s", "h", "err_u", "err_rho", "err_p", "rate_u", "rate_rho", "rate_p"};
  for (const auto& r : rows) {
    std::vector<std::string> cells{std::to_string(r.s), format_double(r.h)};
    for (auto& c : error_cells(r.error))
      cells.push_back(c);
    for (auto& c : rate_cells(r.rate))
      cells.push_back(c);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::vector<DtStudyRow> dt_study(const DtStudySettings& st, const Progress& progress) {
  auto dt_of = [](int j) { return std::ldexp(1.0, -j); };
  if (progress)
    progress("reference run: dt=2^-" + std::to_string(st.reference_exponent));
  const double ref_dt = dt_of(st.reference_exponent);
  const VortexRun ref =
      run_vortex(st.space, st.s, st.level, ref_dt, steps_for(st.final_time, ref_dt), st.upwind, st.picard_tol, st.newton);

  std::vector<DtStudyRow> rows;
  for (int j : st.dt_exponents) {
    if (progress)
      progress("run: dt=2^-" + std::to_string(j));
    const double dt = dt_of(j);
    const VortexRun run = run_vortex(st.space, st.s, st.level, dt, steps_for(st.final_time, dt), st.upwind, st.picard_tol, st.newton);
    DtStudyRow row;
    row.exponent = j;
    row.dt = dt;
    row.error = state_errors(run.state, *run.disc.quad, ref.state, *ref.disc.quad);
    if (!rows.empty())
      row.rate = rates(rows.back().error, row.error, rows.back().dt, dt);
    rows.push_back(row);
  }
  return rows;
}

CsvTable dt_study_table(const std::vector<DtStudyRow>& rows) {
  CsvTable t;
  t.header = {"dt", "err_u", "err_rho", "err_p", "rate_u", "rate_rho", "rate_p"};
  for (const auto& r : rows) {
    std::vector<std::string> cells{format_double(r.dt)};
    for (auto& c : error_cells(r.error))
      cells.push_back(c);
    for (auto& c : rate_cells(r.rate))
      cells.push_back(c);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

} // namespace vdfem
