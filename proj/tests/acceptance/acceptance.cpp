// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--report FILE] [--out DIR] [criterion ...]
//
// With no criterion numbers all nine run. Exit status is nonzero when any fails.

#include "helpers.hpp"
#include "oracles.hpp"

#include "vdfem/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

using namespace vdfem;
using namespace vdfem::test;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

void log(const std::string& msg) { std::cerr << "  " << msg << std::endl; }

// Worst |div u| / ||u|| over every accepted step of every run made here.
struct DivergenceAudit {
  double worst_ratio = 0.0;
  int steps = 0;
  bool violated = false;

  void add(const DiagnosticsSeries& s) {
    for (const auto& r : s.records) {
      ++steps;
      if (r.max_div > 1e-10 * r.u_norm)
        violated = true;
      if (r.u_norm > 0.0)
        worst_ratio = std::max(worst_ratio, r.max_div / r.u_norm);
    }
  }
};

DivergenceAudit g_div;

// |u|^T |A| |v|: the size of the terms summed in v^T A u.
double term_scale(const SparseMatrix& A, const Vector& u, const Vector& v) {
  return v.cwiseAbs().dot(A.cwiseAbs() * u.cwiseAbs());
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  std::mt19937 gen(2024);
  double worst_a = 0.0, worst_bff = 0.0, worst_bfg = 0.0;
  int samples = 0;
  for (int s = 0; s <= 1; ++s)
    for (int m = 0; m <= 1; ++m) {
      const Discretization d = make_discretization(rect_mesh(-1, 1, 4), SpaceKind::RT, s, m);
      const QuadratureSet& qs = *d.quad;
      for (int i = 0; i < 50; ++i, ++samples) {
        const DiscreteField w = random_velocity(gen, d.velocity);
        const Vector u = random_velocity(gen, d.velocity).coeffs();
        const SparseMatrix A = assemble_a(vector_evaluator(w, qs), *d.velocity, qs);
        worst_a = std::max(worst_a, std::abs(u.dot(A * u)) / term_scale(A, u, u));

        const DiscreteField ud = random_divfree(gen, d);
        const SparseMatrix B = assemble_b(vector_evaluator(ud, qs), *d.density, *d.density, qs);
        const Vector f = random_vector(gen, d.density->global_dim());
        const Vector g = random_vector(gen, d.density->global_dim());
        worst_bff = std::max(worst_bff, std::abs(f.dot(B * f)) / term_scale(B, f, f));
        worst_bfg = std::max(worst_bfg, std::abs(g.dot(B * f) + f.dot(B * g)) /
                                            (term_scale(B, f, g) + term_scale(B, g, f)));
      }
    }
  return {worst_a <= 1e-13 && worst_bff <= 1e-12 && worst_bfg <= 1e-12,
          std::to_string(samples) + " samples; max relative |a(w,u,u)| " + fmt(worst_a) + ", |b(u,f,f)| " +
              fmt(worst_bff) + ", |b(u,f,g)+b(u,g,f)| " + fmt(worst_bfg)};
}

// ---------------------------------------------------------------------------

struct ConservationRun {
  int s;
  bool upwind;
  double dM, dE, dF;
  bool f_monotone;
};

ConservationRun conservation_run(int s, bool upwind, bool product_of_means, bool newton) {
  RunConfig cfg = vortex_config(); // h = 1/4 (8 x 8 cells on (-1,1)^2), dt = 0.00625, 80 steps
  cfg.s = s;
  cfg.m = s;
  cfg.c1 = cfg.c2 = upwind ? 0.5 : 0.0;
  cfg.product_of_means = product_of_means;
  cfg.newton = newton;
  const Discretization d = discretization_for(cfg);
  const Stepper stepper(d);
  const RunResult r = run(stepper, initial_state(d, cfg.initial_condition), step_config(cfg), cfg.n_steps);
  g_div.add(r.series);
  const auto& rec = r.series.records;
  ConservationRun out{s, upwind, std::abs(1 - rec.back().mass / rec.front().mass),
                      std::abs(1 - rec.back().energy / rec.front().energy),
                      std::abs(1 - rec.back().squared_density / rec.front().squared_density), true};
  for (std::size_t i = 1; i < rec.size(); ++i) {
    if (rec[i].squared_density > rec[i - 1].squared_density + 1e-13 * rec.front().squared_density)
      out.f_monotone = false;
    // Per-step drift also stays at the solver floor.
    if (std::abs(rec[i].mass - rec[i - 1].mass) > 1e-11 * rec.front().mass)
      out.dM = std::max(out.dM, 1.0);
  }
  return out;
}

// Runs every (s, upwind) case; with both_solvers the frozen Picard iteration is checked as well.
Outcome conservation_suite(bool product_of_means, bool both_solvers) {
  const auto t0 = Clock::now();
  Outcome o;
  bool monotone = true;
  double dM = 0, dE = 0, dF_off = 0, dF_on = 0;
  std::vector<bool> solvers{true};
  if (both_solvers)
    solvers.push_back(false);
  for (bool newton : solvers)
  for (int s = 0; s <= 2; ++s)
    for (bool upwind : {false, true}) {
      const ConservationRun r = conservation_run(s, upwind, product_of_means, newton);
      log(std::string(newton ? "newton" : "picard") + " s=" + std::to_string(s) + (upwind ? " upwind" : " centered") + ": dM " + fmt(r.dM) + " dE " + fmt(r.dE) +
          " dF " + fmt(r.dF));
      dM = std::max(dM, r.dM);
      dE = std::max(dE, r.dE);
      if (upwind) {
        dF_on = std::max(dF_on, r.dF);
        monotone = monotone && r.f_monotone;
      } else {
        dF_off = std::max(dF_off, r.dF);
      }
    }
  const double elapsed = seconds_since(t0);
  o.pass = monotone && dM <= 1e-11 && dE <= 1e-11 && dF_off <= 1e-11 && elapsed <= 600.0;
  o.detail = std::string(both_solvers ? "newton and picard, " : "") + "max |1-M(T)/M(0)| " + fmt(dM) + ", |1-E(T)/E(0)| " + fmt(dE) + ", centered |1-F(T)/F(0)| " +
             fmt(dF_off) + ", upwind F decrease " + fmt(dF_on) + " (monotone " + (monotone ? "yes" : "no") +
             "), " + fmt(elapsed) + " s";
  return o;
}

Outcome criterion3() { return conservation_suite(false, true); }

// ---------------------------------------------------------------------------

Outcome criterion4() {
  std::mt19937 gen(99);
  double worst = 0.0;
  std::string detail;
  for (auto [kind, m] : {std::pair{SpaceKind::RT, 0}, std::pair{SpaceKind::BDM, 2}}) {
    const Discretization d = make_discretization(rect_mesh(-1, 1, 4), kind, 0, m);
    double w = 0.0;
    for (int i = 0; i < 10; ++i) {
      const DiscreteField u = random_divfree(gen, d), v = random_divfree(gen, d);
      w = std::max(w, product_projection_defect(u, v, d.density, *d.quad, gen));
    }
    worst = std::max(worst, w);
    detail += std::string(detail.empty() ? "" : ", ") + (kind == SpaceKind::RT ? "RT0/DG0 " : "BDM1/DG2 ") + fmt(w);
  }
  return {worst <= 1e-12, "max |proj(u.v) - u.v| " + detail + " (need <= 1e-12)"};
}

// ---------------------------------------------------------------------------

std::string out_dir = "acceptance_out";

void save_table(const CsvTable& t, const std::string& name) { write_csv_table(t, out_dir + "/" + name); }

// Least-squares slope of log e against log h.
double fitted_rate(const std::vector<double>& h, const std::vector<double>& e) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// The observed order is the rate between the two finest levels; every pairwise
// rate and the least-squares slope are reported next to it.
struct Rates {
  double finest = 0.0;
  std::string text;
};

Rates rates_of(const std::vector<double>& h, const std::vector<double>& e) {
  const std::vector<double> pairwise = observed_order(e, h);
  Rates r;
  r.finest = pairwise.back();
  for (double x : pairwise)
    r.text += (r.text.empty() ? "" : "/") + fmt(x);
  r.text += " (fit " + fmt(fitted_rate(h, e)) + ")";
  return r;
}

Rates velocity_rates(const std::vector<ConvergenceRow>& rows, int s) {
  std::vector<double> h, e;
  for (const auto& r : rows)
    if (r.s == s && r.level >= 1 && r.level <= 3) {
      h.push_back(r.h);
      e.push_back(r.error.u);
    }
  return rates_of(h, e);
}

Outcome criterion5() {
  const auto t0 = Clock::now();
  ConvergenceSettings st; // reference s = 2, h = 2^-4; levels j = 0..3
  st.levels = {1, 2, 3};
  st.upwind = {0.5, 0.5};
  auto progress = [](const std::string& m) { log(m); };
  const auto up = convergence_study(st, progress);
  save_table(convergence_table(up), "convergence_upwind-on.csv");
  st.upwind = {0.0, 0.0};
  st.degrees = {1};
  const auto off = convergence_study(st, progress);
  save_table(convergence_table(off), "convergence_upwind-off_s1.csv");
  const double elapsed = seconds_since(t0);

  const Rates r0 = velocity_rates(up, 0), r1 = velocity_rates(up, 1), r2 = velocity_rates(up, 2);
  const Rates c1 = velocity_rates(off, 1);
  const bool pass = r0.finest >= 0.8 && r1.finest >= 1.7 && r2.finest >= 2.6 && c1.finest >= 0.8 &&
                    c1.finest <= 1.7 && elapsed <= 1800.0;
  return {pass, "u rates j=1..3, upwind s=0: " + r0.text + ", s=1: " + r1.text + ", s=2: " + r2.text +
                    " (need 0.8, 1.7, 2.6); centered s=1: " + c1.text + " (need [0.8, 1.7]); " + fmt(elapsed) +
                    " s"};
}

// ---------------------------------------------------------------------------

// True when the first step of the dt study at step size dt solves.
bool first_step_solves(const DtStudySettings& st, double dt, std::string& why) {
  RunConfig cfg = vortex_config();
  cfg.space = st.space;
  cfg.s = cfg.m = st.s;
  cfg.nx = cfg.ny = grid_cells_for_level(st.level);
  cfg.dt = dt;
  cfg.c1 = st.upwind.c1;
  cfg.c2 = st.upwind.c2;
  cfg.picard_tol = st.picard_tol;
  const Discretization d = discretization_for(cfg);
  const Stepper stepper(d);
  try {
    stepper.step(initial_state(d, cfg.initial_condition), step_config(cfg));
    return true;
  } catch (const PicardError& e) {
    why = "increment " + fmt(e.increment) + " after " + std::to_string(e.iterations) + " iterations";
    return false;
  }
}

Rates dt_rates(const DtStudySettings& st, const std::string& csv) {
  const auto rows = dt_study(st, [](const std::string& m) { log(m); });
  save_table(dt_study_table(rows), csv);
  std::vector<double> dts, es;
  for (const auto& r : rows) {
    dts.push_back(r.dt);
    es.push_back(r.error.u);
  }
  return rates_of(dts, es);
}

Outcome criterion6() {
  std::string detail;
  bool pass = true;
  for (bool upwind : {true, false}) {
    const std::string mode = upwind ? "upwind" : "centered";
    DtStudySettings st; // s = 2, h = 2^-3, dt = 2^-j for j = 1..4, reference 2^-6
    st.upwind = upwind ? UpwindConfig{0.5, 0.5} : UpwindConfig{0.0, 0.0};
    std::string unsolved;
    for (int j : st.dt_exponents) {
      std::string why;
      if (!first_step_solves(st, std::ldexp(1.0, -j), why))
        unsolved += " 2^-" + std::to_string(j) + " (" + why + ")";
    }
    if (unsolved.empty()) {
      const Rates rate = dt_rates(st, "dt_study_" + mode + ".csv");
      pass = pass && rate.finest >= 1.8;
      detail += mode + " u rates " + rate.text + "; ";
      continue;
    }
    // The requested steps are beyond what the fixed-point iteration can solve on this mesh.
    // A finer sweep still measures the temporal order of the scheme, for the record.
    pass = false;
    DtStudySettings fine = st;
    fine.dt_exponents = {6, 7, 8};
    fine.reference_exponent = 10;
    const Rates rate = dt_rates(fine, "dt_study_" + mode + "_fine.csv");
    detail += mode + " first step unsolved at dt =" + unsolved + ", rates over dt = 2^-6..2^-8 against 2^-10 " +
              rate.text + "; ";
  }
  return {pass, detail + "need >= 1.8 over dt = 2^-1..2^-4"};
}

// ---------------------------------------------------------------------------

Outcome criterion7() {
  const auto before = g_div;
  g_div = {};
  Outcome o = conservation_suite(true, false);
  const bool div_ok = !g_div.violated;
  o.pass = o.pass && div_ok;
  o.detail = "product-of-means: " + o.detail + ", max |div u|/|u| " + fmt(g_div.worst_ratio);
  g_div.worst_ratio = std::max(g_div.worst_ratio, before.worst_ratio);
  g_div.steps += before.steps;
  g_div.violated = g_div.violated || before.violated;
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion8() {
  const auto t0 = Clock::now();
  RunConfig cfg = rayleigh_taylor_config();
  cfg.output_dir = out_dir + "/rayleigh-taylor";
  std::filesystem::remove_all(cfg.output_dir);
  const auto snaps = snapshot_steps({0.8, 0.95, 1.1, 1.25}, cfg.dt);
  std::optional<ScenarioResult> result;
  try {
    result = run_config(cfg, snaps, [](const std::string& m) {
      if (m.find("step ") != std::string::npos && m.find("0/") == std::string::npos)
        return;
      log(m);
    });
  } catch (const Error& e) {
    return {false, std::string("run aborted: ") + e.what()};
  }
  const ScenarioResult& r = *result;
  g_div.add(r.series);
  const auto& rec = r.series.records;
  const double dM = std::abs(1 - rec.back().mass / rec.front().mass);
  bool monotone = true;
  for (std::size_t i = 1; i < rec.size(); ++i)
    monotone = monotone && rec[i].squared_density <= rec[i - 1].squared_density + 1e-13 * rec.front().squared_density;
  int vtk = 0;
  for (const auto& f : r.files)
    vtk += f.ends_with(".vtk") && std::filesystem::exists(f);
  return {dM <= 1e-10 && monotone && vtk == 4 && rec.size() == 126u,
          std::to_string(rec.size() - 1) + " steps, mass drift " + fmt(dM) + ", F monotone " +
              (monotone ? "yes" : "no") + ", F(T)/F(0) " + fmt(rec.back().squared_density / rec.front().squared_density) +
              ", " + std::to_string(vtk) + " VTK snapshots, " + fmt(seconds_since(t0)) + " s"};
}

// ---------------------------------------------------------------------------

Outcome criterion2() {
  // Short extra runs so every velocity family is covered, then the audit of all runs so far.
  for (SpaceKind kind : {SpaceKind::RT, SpaceKind::BDM})
    for (int s = 0; s <= 2; ++s) {
      RunConfig cfg = vortex_config();
      cfg.space = kind;
      cfg.s = s;
      cfg.m = s;
      cfg.nx = cfg.ny = 4;
      cfg.n_steps = 10;
      cfg.c1 = cfg.c2 = 0.5;
      const Discretization d = discretization_for(cfg);
      const Stepper stepper(d);
      g_div.add(run(stepper, initial_state(d, "vortex"), step_config(cfg), cfg.n_steps).series);
    }
  return {!g_div.violated, std::to_string(g_div.steps) + " recorded states; max |div u|/||u|| " + fmt(g_div.worst_ratio) +
                               " (need <= 1e-10)"};
}

// ---------------------------------------------------------------------------

Outcome criterion9() {
  int passed = 0;
  std::string failed;
  for (const auto& o : all_oracles()) {
    const OracleResult r = o.run();
    if (r.pass)
      ++passed;
    else
      failed += " " + o.name + " (" + r.detail + ")";
  }
  return {failed.empty(), std::to_string(passed) + "/" + std::to_string(all_oracles().size()) + " oracles agree" +
                              (failed.empty() ? "" : "; failed:" + failed)};
}

const std::map<int, std::pair<std::string, Outcome (*)()>>& criteria() {
  static const std::map<int, std::pair<std::string, Outcome (*)()>> c{
      {1, {"form identities", criterion1}},
      {2, {"pointwise incompressibility", criterion2}},
      {3, {"conservation", criterion3}},
      {4, {"product projection shortcut", criterion4}},
      {5, {"spatial convergence", criterion5}},
      {6, {"temporal convergence", criterion6}},
      {7, {"product-of-means toggle", criterion7}},
      {8, {"Rayleigh-Taylor", criterion8}},
      {9, {"oracle equivalences", criterion9}},
  };
  return c;
}

} // namespace

int main(int argc, char** argv) {
  std::string report;
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--report" && i + 1 < argc)
      report = argv[++i];
    else if (a == "--out" && i + 1 < argc)
      out_dir = argv[++i];
    else
      selected.insert(std::stoi(a));
  }
  if (selected.empty())
    for (const auto& [n, c] : criteria())
      selected.insert(n);

  // Criterion 2 audits the runs of 3, 7 and 8, so it is evaluated after them.
  std::vector<int> order;
  for (int n : selected)
    if (n != 2)
      order.push_back(n);
  if (selected.count(2))
    order.push_back(2);

  std::map<int, Outcome> results;
  for (int n : order) {
    const auto& [name, fn] = criteria().at(n);
    std::cerr << "criterion " << n << ": " << name << std::endl;
    try {
      results[n] = fn();
    } catch (const std::exception& e) {
      results[n] = {false, std::string("exception: ") + e.what()};
    }
    std::cerr << "  -> " << (results[n].pass ? "PASS" : "FAIL") << std::endl;
  }

  std::ostringstream lines;
  bool all = true;
  for (const auto& [n, o] : results) {
    lines << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << criteria().at(n).first << "): " << o.detail
          << "\n";
    all = all && o.pass;
  }
  std::cout << lines.str();
  if (!report.empty())
    write_text_file(report, lines.str());
  return all ? 0 : 1;
}
