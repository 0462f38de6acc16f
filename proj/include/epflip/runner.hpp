#pragma once

// Drivers behind the command-line tool: single propagations, duration
// scans, Floquet spectra, EP searches and adiabatic predictions, with CSV
// and summary output.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "epflip/bound_states.hpp"
#include "epflip/config.hpp"
#include "epflip/ep_locator.hpp"
#include "epflip/floquet.hpp"
#include "epflip/observables.hpp"
#include "epflip/propagator.hpp"
#include "epflip/pulse.hpp"

namespace epflip {

inline constexpr const char* kVersion = "1.0.0";

/// Header block for every output file: version plus the full configuration.
inline std::string output_header(const RunConfig& c) {
  return std::string("# epflip ") + kVersion + "\n" + echo_config(c, "# ");
}

struct ConvergenceDeltas {
  double half_step = 0.0;      // |P_diss(dt/2) - P_diss(dt)|
  double double_cap = 0.0;     // |P_diss(2A) - P_diss(A)|
  double shifted_start = 0.0;  // max over R_start -+ 10% of the distance to R_max
};

struct RunSummary {
  RunConfig config;
  double duration = 0.0;
  Populations final_populations;
  std::optional<SurvivingFractions> fractions;
  double wall_seconds = 0.0;
  std::optional<ConvergenceDeltas> convergence;

  std::string text() const {
    std::ostringstream o;
    o << echo_config(config);
    o << "[summary]\n" << std::setprecision(17);
    o << "version = " << kVersion << '\n';
    o << "t_total = " << duration << '\n';
    o << "p_diss = " << final_populations.dissociated << '\n';
    for (std::size_t v = 0; v < final_populations.bound.size(); ++v) {
      o << "p_" << v << " = " << final_populations.bound[v] << '\n';
    }
    if (fractions) {
      o << "f_initial = " << fractions->initial << '\n';
      o << "f_target = " << fractions->target << '\n';
      o << "f_other = " << fractions->other << '\n';
    }
    o << "wall_seconds = " << std::setprecision(4) << wall_seconds << '\n' << std::setprecision(17);
    if (convergence) {
      o << "delta_half_step = " << convergence->half_step << '\n';
      o << "delta_double_cap = " << convergence->double_cap << '\n';
      o << "delta_shifted_start = " << convergence->shifted_start << '\n';
    }
    return o.str();
  }
};

struct RunResult {
  RunSummary summary;
  std::vector<ObservableRecord> trace;
};

/// Bound-state solve, initial state, propagation over the contour and
/// observable sampling. `duration` overrides pulse.t_total.
inline RunResult run_propagation(const RunConfig& config, bool record_trace = true,
                                 std::optional<double> duration = std::nullopt) {
  const auto start = std::chrono::steady_clock::now();
  RunConfig c = config;
  if (duration) c.pulse.t_total = *duration;
  validate_config(c);
  const PotentialSet pot = c.potentials();
  const RadialGrid grid = c.radial_grid();
  const AbsorbingPotential cap = c.absorber();
  const PulseContour contour = c.contour();
  const BoundStateBasis basis = solve_bound(grid, pot);
  const std::size_t vi = c.run.v_initial;
  const std::size_t vt = c.run.target();
  if (vi >= basis.count() || vt >= basis.count()) {
    throw ConfigError("run.v_initial", "level outside the " + std::to_string(basis.count()) +
                                           " bound levels of this grid");
  }
  const double t_end = contour.duration();
  FieldFunction field = [contour, t_end](double t) { return contour.field(std::clamp(t, 0.0, t_end)); };
  SplitOperatorPropagator prop(grid, pot, cap, field, c.run.dt);
  ChannelWavepacket psi0 = initial_state(basis, vi);

  RunResult out;
  if (record_trace) {
    const TwoChannelHamiltonian h(grid, pot, cap);
    ObservableSampler sampler(basis, h, field, psi0, vi, vt, c.run.overlap_floor);
    auto trace = propagate(prop, psi0, t_end, c.run.sample_every, sampler);
    out.trace = std::move(trace.records);
    out.summary.final_populations = out.trace.back().populations;
  } else {
    const ChannelWavepacket psi = propagate_to(prop, psi0, t_end);
    out.summary.final_populations = populations(psi, basis);
  }
  double bound = 0.0;
  for (const double p : out.summary.final_populations.bound) bound += p;
  if (bound > 0.0) {
    out.summary.fractions = surviving_fractions(out.summary.final_populations.bound, vi, vt);
  }
  out.summary.config = c;
  out.summary.duration = t_end;
  out.summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Final P_diss changes under dt/2, 2A and R_start moved by 10% of the
/// absorber length either way.
inline ConvergenceDeltas convergence_deltas(const RunConfig& c, double p_diss) {
  auto pdiss = [](const RunConfig& x) {
    return run_propagation(x, false).summary.final_populations.dissociated;
  };
  ConvergenceDeltas d;
  RunConfig half = c;
  half.run.dt *= 0.5;
  d.half_step = std::abs(pdiss(half) - p_diss);
  RunConfig strong = c;
  strong.cap.strength *= 2.0;
  d.double_cap = std::abs(pdiss(strong) - p_diss);
  const double shift = 0.1 * (c.grid.r_max - c.cap.r_start);
  for (const double s : {-shift, shift}) {
    RunConfig moved = c;
    moved.cap.r_start += s;
    d.shifted_start = std::max(d.shifted_start, std::abs(pdiss(moved) - p_diss));
  }
  return d;
}

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("output.dir", "cannot create '" + dir + "': " + ec.message());
}

inline std::string output_path(const RunConfig& c, const std::string& suffix) {
  return (std::filesystem::path(c.output.dir) / (c.output.prefix + suffix)).string();
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path, "cannot open for writing");
  out << std::setprecision(17);
  return out;
}

/// t, P_diss, P_0..P_n, f_initial, f_target, f_other, Re(E_eff), Im(E_eff).
/// Undefined fractions and E_eff are written as empty fields.
inline void write_trace_csv(const std::string& path, const RunConfig& c,
                            const std::vector<ObservableRecord>& trace) {
  auto out = open_output(path);
  out << output_header(c);
  const std::size_t nb = trace.empty() ? 0 : trace.front().populations.bound.size();
  out << "t,p_diss";
  for (std::size_t v = 0; v < nb; ++v) out << ",p_" << v;
  out << ",f_initial,f_target,f_other,re_e_eff,im_e_eff\n";
  for (const auto& r : trace) {
    out << r.time << ',' << r.populations.dissociated;
    for (const double p : r.populations.bound) out << ',' << p;
    if (r.fractions) {
      out << ',' << r.fractions->initial << ',' << r.fractions->target << ',' << r.fractions->other;
    } else {
      out << ",,,";
    }
    if (r.effective_energy) {
      out << ',' << r.effective_energy->real() << ',' << r.effective_energy->imag();
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

inline void write_summary(const std::string& path, const RunSummary& s) {
  auto out = open_output(path);
  out << s.text();
}

struct ScanRow {
  double duration = 0.0;
  double p_diss = 0.0;
  std::optional<SurvivingFractions> fractions;
};

/// Independent propagations per duration, in input order. `parallel`
/// bounds the number of concurrent runs.
inline std::vector<ScanRow> duration_scan(const RunConfig& c, const std::vector<double>& durations,
                                          std::size_t parallel = 1) {
  if (durations.size() < 2) throw ConfigError("durations", "need at least two durations");
  for (const double t : durations) {
    if (!(t > 0.0)) throw ConfigError("durations", "every duration must be > 0");
  }
  auto one = [&c](double t) {
    const RunResult r = run_propagation(c, false, t);
    return ScanRow{t, r.summary.final_populations.dissociated, r.summary.fractions};
  };
  std::vector<ScanRow> rows(durations.size());
  parallel = std::max<std::size_t>(1, parallel);
  for (std::size_t first = 0; first < durations.size(); first += parallel) {
    const std::size_t last = std::min(durations.size(), first + parallel);
    std::vector<std::future<ScanRow>> jobs;
    for (std::size_t k = first; k < last; ++k) {
      jobs.push_back(std::async(parallel > 1 ? std::launch::async : std::launch::deferred, one, durations[k]));
    }
    for (std::size_t k = first; k < last; ++k) rows[k] = jobs[k - first].get();
  }
  return rows;
}

inline void write_scan_csv(const std::string& path, const RunConfig& c, const std::vector<ScanRow>& rows) {
  auto out = open_output(path);
  out << output_header(c);
  out << "t_total,p_diss,f_initial,f_target,f_other\n";
  for (const auto& r : rows) {
    out << r.duration << ',' << r.p_diss;
    if (r.fractions) {
      out << ',' << r.fractions->initial << ',' << r.fractions->target << ',' << r.fractions->other;
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

/// Floquet model for the levels v_initial and v_target over a photon-energy range.
inline FloquetModel floquet_model_for(const RunConfig& c, double omega_lo, double omega_hi) {
  const PotentialSet pot = c.potentials();
  const RadialGrid grid = c.radial_grid();
  const BoundStateBasis basis = solve_bound(grid, pot);
  const std::size_t a = std::min(c.run.v_initial, c.run.target());
  const std::size_t b = std::max(c.run.v_initial, c.run.target());
  if (b >= basis.count()) throw ConfigError("run.v_target", "level outside the bound spectrum");
  return build_floquet_model(grid, pot, c.absorber(), c.floquet.settings,
                             basis.energies[static_cast<Eigen::Index>(a)],
                             basis.energies[static_cast<Eigen::Index>(b)], omega_lo, omega_hi);
}

/// Spectrum at (I, lambda) with the initial and target levels labelled.
inline QuasienergySpectrum floquet_spectrum(const RunConfig& c, double intensity, double wavelength) {
  const double omega = units::wavelength_to_omega(wavelength);
  const FloquetModel m = floquet_model_for(c, omega, omega);
  const std::vector<std::size_t> levels{c.run.v_initial, c.run.target()};
  return quasienergies(m, intensity, wavelength, levels);
}

/// EP between v_initial and v_target in a box of (I [W/cm^2], lambda [nm]).
inline EpCandidate molecule_ep_search(const RunConfig& c, const SearchBox& box,
                                      const EpSearchOptions& opt) {
  const double omega_lo = units::wavelength_to_omega(box.y_hi);
  const double omega_hi = units::wavelength_to_omega(box.y_lo);
  const FloquetModel m = floquet_model_for(c, omega_lo, omega_hi);
  const std::size_t va = c.run.v_initial;
  const std::size_t vb = c.run.target();
  const double ic = 0.5 * (box.x_lo + box.x_hi);
  const double wc = units::wavelength_to_omega(0.5 * (box.y_lo + box.y_hi));
  const double e0c = units::intensity_to_field(ic);
  const cplx shift = 0.5 * (continue_branch(m, va, e0c, wc).value + continue_branch(m, vb, e0c, wc).value);
  auto sep = [&](double intensity, double wavelength) {
    return level_pair(m, units::intensity_to_field(std::max(intensity, 0.0)),
                      units::wavelength_to_omega(wavelength), va, vb, shift)
        .separation();
  };
  EpCandidate out = locate_ep(sep, box, opt);
  out.label_a = "v" + std::to_string(va);
  out.label_b = "v" + std::to_string(vb);
  return out;
}

struct AdiabaticPrediction {
  BranchTrack track;
  double p_diss = 0.0;
};

/// Tracks the v_initial branch over the contour and applies the adiabatic formula.
inline AdiabaticPrediction adiabatic_prediction(const RunConfig& c) {
  const PulseContour contour = c.contour();
  const auto [lo, hi] = floquet_omega_range(contour, c.floquet.settings.effective_frequency);
  const FloquetModel m = floquet_model_for(c, lo, hi);
  AdiabaticPrediction out;
  const std::vector<std::size_t> candidates{c.run.v_initial, c.run.target()};
  out.track = track_branch(m, contour, c.run.v_initial, c.floquet.samples, candidates);
  out.p_diss = adiabatic_pdiss(out.track.times, out.track.widths, 1e-9);
  return out;
}

inline void write_track_csv(const std::string& path, const RunConfig& c, const BranchTrack& t) {
  auto out = open_output(path);
  out << output_header(c);
  const PulseContour contour = c.contour();
  out << "t,intensity,wavelength,omega_floquet,re_e,im_e,width,ambiguous\n";
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    const auto p = contour.point(t.times[k]);
    out << t.times[k] << ',' << p.intensity << ',' << p.wavelength << ',' << t.omegas[k] << ','
        << t.energies[k].real() << ',' << t.energies[k].imag() << ',' << t.widths[k] << ','
        << (t.ambiguous[k] ? 1 : 0) << '\n';
  }
}

}  // namespace epflip
