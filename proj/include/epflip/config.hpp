#pragma once

// Run configuration: INI file with one section per module.
//
//   [molecule]  preset = h2plus | na2 | files, eps1, eps2, dipole, mass
//   [grid]      r_min, r_max, points
//   [cap]       strength, r_start
//   [pulse]     i_max (W/cm^2), lambda0 (nm), delta_lambda (nm), t_total (a.u.), clockwise
//   [run]       v_initial, v_target, dt, sample_every, overlap_floor
//   [floquet]   n_photon, window, margin, effective_frequency, samples, tie_tolerance, min_overlap
//   [output]    dir, prefix
//
// Preset defaults are applied first, then the file's keys. A [summary]
// section (written by the runner) is ignored so summaries can be fed back.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>

#include "epflip/errors.hpp"
#include "epflip/floquet.hpp"
#include "epflip/grid.hpp"
#include "epflip/observables.hpp"
#include "epflip/potentials.hpp"
#include "epflip/propagator.hpp"
#include "epflip/pulse.hpp"

namespace epflip {

/// Largest dt times the step energy scale accepted by validation.
inline constexpr double kMaxStepPhase = 0.5;

struct MoleculeConfig {
  std::string preset = "h2plus";
  std::string eps1_file;
  std::string eps2_file;
  std::string dipole_file;
  double mass = 0.0;
};

struct GridConfig {
  double r_min = 0.2;
  double r_max = 25.0;
  std::size_t points = 1024;
};

struct CapConfig {
  double strength = 0.5;
  double r_start = 20.0;
};

struct PulseConfig {
  double i_max = 0.3e13;
  double lambda0 = 420.0;
  double delta_lambda = 30.0;
  double t_total = 2315.0;
  bool clockwise = true;
};

struct RunSettings {
  std::size_t v_initial = 8;
  std::optional<std::size_t> v_target;
  double dt = 0.05;
  std::size_t sample_every = 20;
  double overlap_floor = kDefaultOverlapFloor;

  std::size_t target() const noexcept {
    if (v_target) return *v_target;
    return v_initial > 0 ? v_initial - 1 : v_initial + 1;
  }
};

struct FloquetConfig {
  FloquetSettings settings;
  std::size_t samples = 400;
};

struct OutputConfig {
  std::string dir = ".";
  std::string prefix = "run";
};

struct RunConfig {
  MoleculeConfig molecule;
  GridConfig grid;
  CapConfig cap;
  PulseConfig pulse;
  RunSettings run;
  FloquetConfig floquet;
  OutputConfig output;

  PotentialSet potentials() const {
    if (molecule.preset == "h2plus") return builtin_h2plus();
    if (molecule.preset == "na2") return builtin_na2();
    return potentials_from_files(molecule.eps1_file, molecule.eps2_file, molecule.dipole_file,
                                 molecule.mass);
  }
  RadialGrid radial_grid() const { return {grid.r_min, grid.r_max, grid.points}; }
  AbsorbingPotential absorber() const { return {cap.strength, cap.r_start}; }
  PulseContour contour() const {
    return {pulse.i_max, pulse.lambda0, pulse.delta_lambda, pulse.t_total, pulse.clockwise};
  }
};

namespace detail {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(const std::string& field, const std::string& text) {
  double x = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc() || res.ptr != last) throw ConfigError(field, "not a number: '" + text + "'");
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

inline std::size_t parse_count(const std::string& field, const std::string& text) {
  long long x = 0;
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(text.data(), last, x);
  if (res.ec != std::errc() || res.ptr != last) throw ConfigError(field, "not an integer: '" + text + "'");
  if (x < 0) throw ConfigError(field, "must be >= 0");
  return static_cast<std::size_t>(x);
}

inline bool parse_bool(const std::string& field, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(field, "expected true/false, got '" + text + "'");
}

inline std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Defaults of a built-in molecule.
inline RunConfig preset_config(const std::string& preset) {
  RunConfig c;
  c.molecule.preset = preset;
  if (preset == "h2plus" || preset == "files") return c;
  if (preset == "na2") {
    c.grid = {4.0, 60.0, 512};
    c.cap = {0.01, 45.0};
    c.pulse = {0.37e9, 559.0, 1.3, 33073.0, true};
    c.run.v_initial = 3;
    c.run.dt = 0.25;
    c.run.sample_every = 100;
    c.floquet.settings.window = 3e-4;
    c.floquet.settings.margin = 1.5e-3;
    return c;
  }
  throw ConfigError("molecule.preset", "unknown preset '" + preset + "' (h2plus, na2, files)");
}

/// Structural checks of a configuration. Throws ConfigError naming the field.
inline void validate_config(const RunConfig& c) {
  const auto& m = c.molecule;
  if (m.preset == "files") {
    if (m.eps1_file.empty()) throw ConfigError("molecule.eps1", "required for preset = files");
    if (m.eps2_file.empty()) throw ConfigError("molecule.eps2", "required for preset = files");
    if (m.dipole_file.empty()) throw ConfigError("molecule.dipole", "required for preset = files");
    if (!(m.mass > 0.0)) throw ConfigError("molecule.mass", "must be > 0");
  }
  const auto& g = c.grid;
  if (!(g.r_min > 0.0)) throw ConfigError("grid.r_min", "must be > 0");
  if (!(g.r_max > g.r_min)) throw ConfigError("grid.r_max", "must exceed r_min");
  if (g.points < 8 || (g.points & (g.points - 1)) != 0) {
    throw ConfigError("grid.points", "must be a power of two >= 8");
  }
  if (!(c.cap.r_start > g.r_min)) throw ConfigError("cap.r_start", "must exceed grid.r_min");
  if (!(c.cap.r_start < g.r_max)) throw ConfigError("cap.r_start", "must be below grid.r_max");
  if (!(c.cap.strength >= 0.0)) throw ConfigError("cap.strength", "must be >= 0");
  const auto& p = c.pulse;
  if (!(p.i_max >= 0.0)) throw ConfigError("pulse.i_max", "must be >= 0");
  if (!(p.lambda0 > 0.0)) throw ConfigError("pulse.lambda0", "must be > 0");
  if (!(p.lambda0 - std::abs(p.delta_lambda) > 0.0)) {
    throw ConfigError("pulse.delta_lambda", "wavelength would reach zero");
  }
  if (!(p.t_total > 0.0)) throw ConfigError("pulse.t_total", "must be > 0");
  if (!(c.run.dt > 0.0)) throw ConfigError("run.dt", "must be > 0");
  if (c.run.sample_every == 0) throw ConfigError("run.sample_every", "must be >= 1");
  if (!(c.run.overlap_floor > 0.0)) throw ConfigError("run.overlap_floor", "must be > 0");
  const auto& f = c.floquet;
  if (f.settings.n_photon < 1) throw ConfigError("floquet.n_photon", "must be >= 1");
  if (!(f.settings.window > 0.0)) throw ConfigError("floquet.window", "must be > 0");
  if (!(f.settings.margin >= 0.0)) throw ConfigError("floquet.margin", "must be >= 0");
  if (f.samples < 100) throw ConfigError("floquet.samples", "must be >= 100");
  if (!(f.settings.tie_tolerance >= 0.0)) throw ConfigError("floquet.tie_tolerance", "must be >= 0");
  if (!(f.settings.min_overlap > 0.0 && f.settings.min_overlap <= 1.0)) {
    throw ConfigError("floquet.min_overlap", "must be in (0, 1]");
  }
}

/// Step heuristic: dt times the largest energy on the grid. Needs the
/// potentials, so it is separate from validate_config.
inline void validate_step(const RunConfig& c, const PotentialSet& pot) {
  const double phase = c.run.dt * step_energy_scale(c.radial_grid(), pot);
  if (!(phase <= kMaxStepPhase)) {
    throw ConfigError("run.dt", "dt * max grid energy = " + detail::format_double(phase) +
                                    " exceeds " + detail::format_double(kMaxStepPhase));
  }
  const std::size_t n = solve_bound(c.radial_grid(), pot).count();
  if (c.run.v_initial >= n) {
    throw ConfigError("run.v_initial", "only " + std::to_string(n) + " bound levels on this grid");
  }
  if (c.run.target() >= n) {
    throw ConfigError("run.v_target", "only " + std::to_string(n) + " bound levels on this grid");
  }
}

/// Parses INI text. `source` names the input in diagnostics.
inline RunConfig parse_config(std::istream& in, const std::string& source = "config") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [key, node] : tree) {
    if (node.empty() && !node.data().empty()) {
      throw ConfigError(key, "key outside any section");
    }
  }

  std::string preset = "h2plus";
  if (const auto mol = tree.get_child_optional("molecule")) {
    if (const auto p = mol->get_optional<std::string>("preset")) preset = detail::trim(*p);
  }
  RunConfig c = preset_config(preset);

  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto num = [](double& x) -> Setter {
    return [&x](const std::string& f, const std::string& v) { x = detail::parse_double(f, v); };
  };
  auto count = [](std::size_t& x) -> Setter {
    return [&x](const std::string& f, const std::string& v) { x = detail::parse_count(f, v); };
  };
  auto flag = [](bool& x) -> Setter {
    return [&x](const std::string& f, const std::string& v) { x = detail::parse_bool(f, v); };
  };
  auto text = [](std::string& x) -> Setter {
    return [&x](const std::string&, const std::string& v) { x = v; };
  };
  auto& fs = c.floquet.settings;
  const std::map<std::string, std::map<std::string, Setter>> keys{
      {"molecule",
       {{"preset", [](const std::string&, const std::string&) {}},
        {"eps1", text(c.molecule.eps1_file)},
        {"eps2", text(c.molecule.eps2_file)},
        {"dipole", text(c.molecule.dipole_file)},
        {"mass", num(c.molecule.mass)}}},
      {"grid", {{"r_min", num(c.grid.r_min)}, {"r_max", num(c.grid.r_max)}, {"points", count(c.grid.points)}}},
      {"cap", {{"strength", num(c.cap.strength)}, {"r_start", num(c.cap.r_start)}}},
      {"pulse",
       {{"i_max", num(c.pulse.i_max)},
        {"lambda0", num(c.pulse.lambda0)},
        {"delta_lambda", num(c.pulse.delta_lambda)},
        {"t_total", num(c.pulse.t_total)},
        {"clockwise", flag(c.pulse.clockwise)}}},
      {"run",
       {{"v_initial", count(c.run.v_initial)},
        {"v_target",
         [&c](const std::string& f, const std::string& v) { c.run.v_target = detail::parse_count(f, v); }},
        {"dt", num(c.run.dt)},
        {"sample_every", count(c.run.sample_every)},
        {"overlap_floor", num(c.run.overlap_floor)}}},
      {"floquet",
       {{"n_photon",
         [&fs](const std::string& f, const std::string& v) {
           fs.n_photon = static_cast<int>(detail::parse_count(f, v));
         }},
        {"window", num(fs.window)},
        {"margin", num(fs.margin)},
        {"effective_frequency", flag(fs.effective_frequency)},
        {"samples", count(c.floquet.samples)},
        {"tie_tolerance", num(fs.tie_tolerance)},
        {"min_overlap", num(fs.min_overlap)}}},
      {"output", {{"dir", text(c.output.dir)}, {"prefix", text(c.output.prefix)}}},
  };

  for (const auto& [section, node] : tree) {
    if (section == "summary") continue;
    const auto sec = keys.find(section);
    if (sec == keys.end()) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : node) {
      const std::string field = section + "." + key;
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) throw ConfigError(field, "unknown key");
      const std::string v = detail::trim(value.data());
      if (v.empty()) throw ConfigError(field, "empty value");
      it->second(field, v);
    }
  }
  validate_config(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  return parse_config(in, path);
}

/// INI text that parses back to the same configuration. Every line is
/// prefixed with `prefix` (e.g. "# " to embed it in a CSV header).
inline std::string echo_config(const RunConfig& c, const std::string& prefix = {}) {
  using detail::format_double;
  std::ostringstream o;
  auto line = [&](const std::string& s) { o << prefix << s << '\n'; };
  auto kv = [&](const std::string& k, const std::string& v) { line(k + " = " + v); };
  const char* yes = "true";
  const char* no = "false";
  line("[molecule]");
  kv("preset", c.molecule.preset);
  if (c.molecule.preset == "files") {
    kv("eps1", c.molecule.eps1_file);
    kv("eps2", c.molecule.eps2_file);
    kv("dipole", c.molecule.dipole_file);
    kv("mass", format_double(c.molecule.mass));
  }
  line("[grid]");
  kv("r_min", format_double(c.grid.r_min));
  kv("r_max", format_double(c.grid.r_max));
  kv("points", std::to_string(c.grid.points));
  line("[cap]");
  kv("strength", format_double(c.cap.strength));
  kv("r_start", format_double(c.cap.r_start));
  line("[pulse]");
  kv("i_max", format_double(c.pulse.i_max));
  kv("lambda0", format_double(c.pulse.lambda0));
  kv("delta_lambda", format_double(c.pulse.delta_lambda));
  kv("t_total", format_double(c.pulse.t_total));
  kv("clockwise", c.pulse.clockwise ? yes : no);
  line("[run]");
  kv("v_initial", std::to_string(c.run.v_initial));
  if (c.run.v_target) kv("v_target", std::to_string(*c.run.v_target));
  kv("dt", format_double(c.run.dt));
  kv("sample_every", std::to_string(c.run.sample_every));
  kv("overlap_floor", format_double(c.run.overlap_floor));
  const auto& fs = c.floquet.settings;
  line("[floquet]");
  kv("n_photon", std::to_string(fs.n_photon));
  kv("window", format_double(fs.window));
  kv("margin", format_double(fs.margin));
  kv("effective_frequency", fs.effective_frequency ? yes : no);
  kv("samples", std::to_string(c.floquet.samples));
  kv("tie_tolerance", format_double(fs.tie_tolerance));
  kv("min_overlap", format_double(fs.min_overlap));
  line("[output]");
  kv("dir", c.output.dir);
  kv("prefix", c.output.prefix);
  return o.str();
}

}  // namespace epflip
