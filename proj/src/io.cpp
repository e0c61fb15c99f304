#include "vdfem/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace vdfem {

namespace {

// Canonical key order; section is the part before the dot.
constexpr std::array kKeys = {
    "scenario",         "initial_condition",
    "domain.x_min",     "domain.x_max",       "domain.y_min",      "domain.y_max",     "domain.nx", "domain.ny",
    "discretization.space", "discretization.s", "discretization.m",
    "time.dt",          "time.n_steps",       "time.picard_tol",   "time.picard_max",  "time.momentum_average",
    "time.linearization",
    "upwind.c1",        "upwind.c2",
    "forcing.body_force",
    "output.dir",       "output.cadence",
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool known_key(const std::string& key) {
  for (const char* k : kKeys)
    if (key == k)
      return true;
  return key == "time.T";
}

// Resolves a bare top-level name to its qualified key.
std::string qualify(const std::string& section, const std::string& key) {
  if (!section.empty())
    return section + "." + key;
  if (known_key(key))
    return key;
  std::string found;
  for (const char* k : kKeys) {
    std::string_view kv(k);
    const auto dot = kv.find('.');
    if (dot != std::string_view::npos && kv.substr(dot + 1) == key)
      found = k;
  }
  if (key == "T")
    found = "time.T";
  return found.empty() ? key : found;
}

double parse_double(const std::string& v, int line, const std::string& key) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'", line, key);
  return x;
}

int parse_int(const std::string& v, int line, const std::string& key) {
  int x = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key + ": expected an integer, got '" + v + "'", line, key);
  return x;
}

bool valid_name(const std::string& s) {
  if (s.empty())
    return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
      return false;
  return true;
}

} // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& what) { throw ConfigError(field + ": " + what, 0, field); };
  if (!valid_name(scenario))
    fail("scenario", "must be a non-empty name of letters, digits, '-' or '_'");
  if (initial_condition != "vortex" && initial_condition != "rayleigh-taylor")
    fail("initial_condition", "must be 'vortex' or 'rayleigh-taylor'");
  if (!(domain.xmax > domain.xmin))
    fail("domain.x_max", "must exceed domain.x_min");
  if (!(domain.ymax > domain.ymin))
    fail("domain.y_max", "must exceed domain.y_min");
  if (nx < 1)
    fail("domain.nx", "must be >= 1");
  if (ny < 1)
    fail("domain.ny", "must be >= 1");
  if (space == SpaceKind::DG)
    fail("discretization.space", "must be RT or BDM");
  if (s < 0 || s > 2)
    fail("discretization.s", std::string("must be in [0, 2] for ") + to_string(space));
  if (m < 0 || m > 4)
    fail("discretization.m", "must be in [0, 4]");
  if (!(dt > 0.0))
    fail("time.dt", "must be positive");
  if (n_steps < 0)
    fail("time.n_steps", "must be >= 0");
  if (!(picard_tol >= 1e-14))
    fail("time.picard_tol", "must be >= 1e-14");
  if (picard_max < 1)
    fail("time.picard_max", "must be >= 1");
  if (!(c1 >= 0.0 && c1 <= 0.5))
    fail("upwind.c1", "must be in [0, 1/2]");
  if (!(c2 >= 0.0 && c2 <= 0.5))
    fail("upwind.c2", "must be in [0, 1/2]");
  if (output_dir.empty())
    fail("output.dir", "must not be empty");
  if (cadence < 1)
    fail("output.cadence", "must be >= 1");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::optional<double> final_time;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string l = trim(std::string_view(raw).substr(0, hash));
    if (l.empty())
      continue;
    if (l.front() == '[') {
      if (l.back() != ']')
        throw ConfigError("malformed section header '" + l + "'", line);
      section = trim(std::string_view(l).substr(1, l.size() - 2));
      if (!valid_name(section))
        throw ConfigError("malformed section header '" + l + "'", line);
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value, got '" + l + "'", line);
    const std::string key = qualify(section, trim(std::string_view(l).substr(0, eq)));
    const std::string v = trim(std::string_view(l).substr(eq + 1));
    if (!known_key(key))
      throw ConfigError("unknown key '" + key + "'", line, key);
    if (seen.count(key))
      throw ConfigError("duplicate key '" + key + "'", line, key);
    seen[key] = line;

    if (key == "scenario")
      cfg.scenario = v;
    else if (key == "initial_condition")
      cfg.initial_condition = v;
    else if (key == "domain.x_min")
      cfg.domain.xmin = parse_double(v, line, key);
    else if (key == "domain.x_max")
      cfg.domain.xmax = parse_double(v, line, key);
    else if (key == "domain.y_min")
      cfg.domain.ymin = parse_double(v, line, key);
    else if (key == "domain.y_max")
      cfg.domain.ymax = parse_double(v, line, key);
    else if (key == "domain.nx")
      cfg.nx = parse_int(v, line, key);
    else if (key == "domain.ny")
      cfg.ny = parse_int(v, line, key);
    else if (key == "discretization.space") {
      if (v == "RT")
        cfg.space = SpaceKind::RT;
      else if (v == "BDM")
        cfg.space = SpaceKind::BDM;
      else
        throw ConfigError(key + ": must be RT or BDM, got '" + v + "'", line, key);
    } else if (key == "discretization.s")
      cfg.s = parse_int(v, line, key);
    else if (key == "discretization.m")
      cfg.m = parse_int(v, line, key);
    else if (key == "time.dt")
      cfg.dt = parse_double(v, line, key);
    else if (key == "time.n_steps")
      cfg.n_steps = parse_int(v, line, key);
    else if (key == "time.T")
      final_time = parse_double(v, line, key);
    else if (key == "time.picard_tol")
      cfg.picard_tol = parse_double(v, line, key);
    else if (key == "time.picard_max")
      cfg.picard_max = parse_int(v, line, key);
    else if (key == "time.momentum_average") {
      if (v == "mean-of-products")
        cfg.product_of_means = false;
      else if (v == "product-of-means")
        cfg.product_of_means = true;
      else
        throw ConfigError(key + ": must be mean-of-products or product-of-means", line, key);
    } else if (key == "time.linearization") {
      if (v == "newton")
        cfg.newton = true;
      else if (v == "picard")
        cfg.newton = false;
      else
        throw ConfigError(key + ": must be newton or picard", line, key);
    } else if (key == "upwind.c1")
      cfg.c1 = parse_double(v, line, key);
    else if (key == "upwind.c2")
      cfg.c2 = parse_double(v, line, key);
    else if (key == "forcing.body_force") {
      if (v == "none")
        cfg.body_force.reset();
      else {
        std::istringstream parts(v);
        std::string gx, gy, extra;
        if (!(parts >> gx >> gy) || (parts >> extra))
          throw ConfigError(key + ": expected 'none' or two numbers", line, key);
        cfg.body_force = Vec2(parse_double(gx, line, key), parse_double(gy, line, key));
      }
    } else if (key == "output.dir")
      cfg.output_dir = v;
    else if (key == "output.cadence")
      cfg.cadence = parse_int(v, line, key);
  }

  if (final_time) {
    const int line_t = seen.at("time.T");
    if (!(*final_time >= 0.0))
      throw ConfigError("time.T: must be >= 0", line_t, "time.T");
    const double ratio = *final_time / cfg.dt;
    const double n = std::round(ratio);
    if (!(cfg.dt > 0.0) || std::abs(ratio - n) > 1e-9 * std::max(1.0, n))
      throw ConfigError("time.T: must be an integer multiple of time.dt", line_t, "time.T");
    if (seen.count("time.n_steps") && cfg.n_steps != static_cast<int>(n))
      throw ConfigError("time.T: disagrees with time.n_steps", line_t, "time.T");
    cfg.n_steps = static_cast<int>(n);
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    auto it = seen.find(e.field);
    if (it == seen.end())
      throw;
    throw ConfigError(e.what(), it->second, e.field);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc())
    throw Error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

std::string print_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "scenario = " << cfg.scenario << "\n";
  out << "initial_condition = " << cfg.initial_condition << "\n";
  out << "\n[domain]\n";
  out << "x_min = " << format_double(cfg.domain.xmin) << "\n";
  out << "x_max = " << format_double(cfg.domain.xmax) << "\n";
  out << "y_min = " << format_double(cfg.domain.ymin) << "\n";
  out << "y_max = " << format_double(cfg.domain.ymax) << "\n";
  out << "nx = " << cfg.nx << "\n";
  out << "ny = " << cfg.ny << "\n";
  out << "\n[discretization]\n";
  out << "space = " << to_string(cfg.space) << "\n";
  out << "s = " << cfg.s << "\n";
  out << "m = " << cfg.m << "\n";
  out << "\n[time]\n";
  out << "dt = " << format_double(cfg.dt) << "\n";
  out << "n_steps = " << cfg.n_steps << "\n";
  out << "picard_tol = " << format_double(cfg.picard_tol) << "\n";
  out << "picard_max = " << cfg.picard_max << "\n";
  out << "momentum_average = " << (cfg.product_of_means ? "product-of-means" : "mean-of-products") << "\n";
  out << "linearization = " << (cfg.newton ? "newton" : "picard") << "\n";
  out << "\n[upwind]\n";
  out << "c1 = " << format_double(cfg.c1) << "\n";
  out << "c2 = " << format_double(cfg.c2) << "\n";
  out << "\n[forcing]\n";
  if (cfg.body_force)
    out << "body_force = " << format_double(cfg.body_force->x()) << " " << format_double(cfg.body_force->y()) << "\n";
  else
    out << "body_force = none\n";
  out << "\n[output]\n";
  out << "dir = " << cfg.output_dir << "\n";
  out << "cadence = " << cfg.cadence << "\n";
  return out.str();
}

namespace {

std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos)
    return f;
  std::string q = "\"";
  for (char c : f) {
    if (c == '"')
      q += '"';
    q += c;
  }
  return q + "\"";
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i)
    out << (i ? "," : "") << csv_field(row[i]);
  out << "\r\n";
}

std::ofstream open_for_write(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path())
    std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot open '" + path + "' for writing");
  return out;
}

void check_written(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out)
    throw Error("write to '" + path + "' failed");
}

} // namespace

void CsvTable::write(std::ostream& out) const {
  write_csv_row(out, header);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw Error("CsvTable: row width does not match header");
    write_csv_row(out, row);
  }
}

void write_csv_table(const CsvTable& table, const std::string& path) {
  auto out = open_for_write(path);
  table.write(out);
  check_written(out, path);
}

void write_text_file(const std::string& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
  check_written(out, path);
}

void write_vtk(const DiscreteField& u, const DiscreteField& rho, std::ostream& out) {
  const Mesh& mesh = u.space().mesh();
  if (&rho.space().mesh() != &mesh)
    throw Error("write_vtk: fields live on different meshes");
  const int nt = mesh.num_elements();
  const int np = 3 * nt;
  const std::array<Vec2, 3> corners{Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};

  out << "# vtk DataFile Version 3.0\n";
  out << "density and velocity\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << np << " double\n";
  for (int k = 0; k < nt; ++k)
    for (const Vec2& c : corners) {
      const Vec2 x = mesh.to_physical(k, c);
      out << format_double(x.x()) << " " << format_double(x.y()) << " 0\n";
    }
  out << "CELLS " << nt << " " << 4 * nt << "\n";
  for (int k = 0; k < nt; ++k)
    out << "3 " << 3 * k << " " << 3 * k + 1 << " " << 3 * k + 2 << "\n";
  out << "CELL_TYPES " << nt << "\n";
  for (int k = 0; k < nt; ++k)
    out << "5\n";
  out << "POINT_DATA " << np << "\n";
  out << "SCALARS rho double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (int k = 0; k < nt; ++k)
    for (double r : eval_scalar(rho, k, corners))
      out << format_double(r) << "\n";
  out << "VECTORS u double\n";
  for (int k = 0; k < nt; ++k)
    for (const Vec2& v : eval_vector(u, k, corners))
      out << format_double(v.x()) << " " << format_double(v.y()) << " 0\n";
}

void write_vtk(const State& state, const std::string& path) {
  auto out = open_for_write(path);
  write_vtk(state.u, state.rho, out);
  check_written(out, path);
}

} // namespace vdfem
