// Command line driver: convergence studies, the Rayleigh-Taylor run and ad hoc configs.

#include "vdfem/scenarios.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#ifndef VDFEM_GIT_COMMIT
#define VDFEM_GIT_COMMIT "unknown"
#endif

using namespace vdfem;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::string profile = "desk";
  std::string upwind;
  std::string command_line;
};

using Clock = std::chrono::steady_clock;

Progress stderr_progress() {
  const auto start = Clock::now();
  return [start](const std::string& msg) {
    const double sec = std::chrono::duration<double>(Clock::now() - start).count();
    std::fprintf(stderr, "[%8.1fs] %s\n", sec, msg.c_str());
  };
}

// Upwind settings selected by --upwind; `fallback` applies when the flag is absent.
std::vector<bool> upwind_modes(const Options& opt, const std::string& fallback) {
  const std::string mode = opt.upwind.empty() ? fallback : opt.upwind;
  if (mode == "on")
    return {true};
  if (mode == "off")
    return {false};
  return {true, false};
}

UpwindConfig upwind_of(bool on) { return on ? UpwindConfig{0.5, 0.5} : UpwindConfig{0.0, 0.0}; }

std::string mode_suffix(bool on) { return on ? "upwind-on" : "upwind-off"; }

RunConfig base_config(const Options& opt, const RunConfig& fallback) {
  return opt.config_path.empty() ? fallback : load_config(opt.config_path);
}

void write_manifest(const Options& opt, const std::string& command, const RunConfig& cfg,
                    const std::vector<std::string>& extra, const std::vector<std::string>& files) {
  std::ostringstream m;
  m << "# vdfem run manifest\n";
  m << "command = " << command << "\n";
  m << "command_line = " << opt.command_line << "\n";
  m << "version = " << VDFEM_VERSION << "\n";
  m << "commit = " << VDFEM_GIT_COMMIT << "\n";
  m << "profile = " << opt.profile << "\n";
  m << "upwind = " << (opt.upwind.empty() ? "default" : opt.upwind) << "\n";
  m << "config_source = " << (opt.config_path.empty() ? "built-in" : opt.config_path) << "\n";
  for (const auto& line : extra)
    m << line << "\n";
  for (const auto& f : files)
    m << "output = " << f << "\n";
  m << "\n# config echo\n" << print_config(cfg);
  write_text_file(opt.out_dir + "/manifest.txt", m.str());
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (int x : v)
    s += (s.empty() ? "" : " ") + std::to_string(x);
  return s;
}

int cmd_convergence(const Options& opt) {
  const RunConfig base = base_config(opt, vortex_config());
  ConvergenceSettings st;
  st.space = base.space;
  st.dt = base.dt;
  st.final_time = base.dt * base.n_steps;
  st.picard_tol = base.picard_tol;
  st.newton = base.newton;
  st.reference_level = opt.profile == "paper" ? 5 : 4;
  const Progress progress = stderr_progress();
  std::vector<std::string> files;
  for (bool on : upwind_modes(opt, "both")) {
    st.upwind = upwind_of(on);
    progress("convergence, " + mode_suffix(on));
    const auto rows = convergence_study(st, progress);
    files.push_back(opt.out_dir + "/convergence_" + mode_suffix(on) + ".csv");
    write_csv_table(convergence_table(rows), files.back());
  }
  write_manifest(opt, "convergence", base,
                 {"degrees = " + join(st.degrees), "levels = " + join(st.levels),
                  "reference = s " + std::to_string(st.reference_degree) + " level " +
                      std::to_string(st.reference_level),
                  "final_time = " + format_double(st.final_time)},
                 files);
  return 0;
}

int cmd_dt_study(const Options& opt) {
  const RunConfig base = base_config(opt, vortex_config());
  DtStudySettings st;
  st.space = base.space;
  st.final_time = base.dt * base.n_steps;
  st.picard_tol = base.picard_tol;
  st.newton = base.newton;
  st.level = opt.profile == "paper" ? 4 : 3;
  const Progress progress = stderr_progress();
  std::vector<std::string> files;
  for (bool on : upwind_modes(opt, "both")) {
    st.upwind = upwind_of(on);
    progress("dt-study, " + mode_suffix(on));
    const auto rows = dt_study(st, progress);
    files.push_back(opt.out_dir + "/dt_study_" + mode_suffix(on) + ".csv");
    write_csv_table(dt_study_table(rows), files.back());
  }
  write_manifest(opt, "dt-study", base,
                 {"s = " + std::to_string(st.s), "level = " + std::to_string(st.level),
                  "dt_exponents = " + join(st.dt_exponents),
                  "reference_exponent = " + std::to_string(st.reference_exponent),
                  "final_time = " + format_double(st.final_time)},
                 files);
  return 0;
}

// Runs `cfg` once per selected upwind mode; with two modes each gets its own subdirectory.
int run_modes(const Options& opt, const std::string& command, RunConfig cfg, const std::vector<int>& snapshots,
              const std::string& fallback_mode) {
  const Progress progress = stderr_progress();
  std::vector<std::string> files;
  const auto modes = opt.upwind.empty() && fallback_mode.empty() ? std::vector<bool>{} : upwind_modes(opt, fallback_mode);
  if (modes.empty()) {
    cfg.output_dir = opt.out_dir;
    files = run_config(cfg, snapshots, progress).files;
  } else {
    for (bool on : modes) {
      RunConfig c = cfg;
      c.c1 = upwind_of(on).c1;
      c.c2 = upwind_of(on).c2;
      c.output_dir = modes.size() > 1 ? opt.out_dir + "/" + mode_suffix(on) : opt.out_dir;
      const auto r = run_config(c, snapshots, progress);
      files.insert(files.end(), r.files.begin(), r.files.end());
      cfg = c;
    }
  }
  write_manifest(opt, command, cfg, {}, files);
  return 0;
}

int cmd_rayleigh_taylor(const Options& opt) {
  RunConfig cfg = base_config(opt, rayleigh_taylor_config());
  if (opt.config_path.empty() && opt.profile == "paper") {
    cfg.nx = 64;
    cfg.ny = 256;
  }
  return run_modes(opt, "rayleigh-taylor", cfg, snapshot_steps({0.0, 0.8, 0.95, 1.1, 1.25}, cfg.dt), "on");
}

int cmd_run(const Options& opt, const std::string& path) {
  Options o = opt;
  o.config_path = path;
  return run_modes(o, "run", load_config(path), {}, "");
}

} // namespace

int main(int argc, char** argv) {
  Options opt;
  for (int i = 0; i < argc; ++i)
    opt.command_line += (i ? " " : "") + std::string(argv[i]);

  CLI::App app{"Structure-preserving FE solver for variable-density incompressible Euler"};
  app.set_version_flag("--version", std::string(VDFEM_VERSION) + " (" + VDFEM_GIT_COMMIT + ")");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", opt.config_path, "Config file overriding the built-in setup")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
  app.add_option("--profile", opt.profile, "Problem sizes")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
  app.add_option("--upwind", opt.upwind, "Upwind setting(s) to run")->check(CLI::IsMember({"on", "off", "both"}));

  auto* conv = app.add_subcommand("convergence", "Spatial convergence study on the vortex problem");
  auto* dts = app.add_subcommand("dt-study", "Temporal convergence study on the vortex problem");
  auto* rt = app.add_subcommand("rayleigh-taylor", "Rayleigh-Taylor instability with gravity");
  auto* run = app.add_subcommand("run", "Run a config file");
  std::string run_path;
  run->add_option("config", run_path, "Config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*conv)
      return cmd_convergence(opt);
    if (*dts)
      return cmd_dt_study(opt);
    if (*rt)
      return cmd_rayleigh_taylor(opt);
    if (*run)
      return cmd_run(opt, run_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
