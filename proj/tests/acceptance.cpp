// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "epflip/runner.hpp"
#include "epflip/two_level.hpp"
#include "oracles.hpp"

using namespace epflip;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig shipped(const std::string& name) {
  return load_config(std::string(EPFLIP_CONFIG_DIR) + "/" + name + ".ini");
}

std::size_t dominant_level(const Populations& p) {
  return static_cast<std::size_t>(std::max_element(p.bound.begin(), p.bound.end()) - p.bound.begin());
}

Outcome morse_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const double depth = 0.1;
  const double alpha = 1.0;
  const double mass = 1000.0;
  const auto b = solve_bound(RadialGrid(0.5, 40.0, 1024), oracle::morse_set(depth, alpha, 2.0, mass));
  const auto exact = oracle::morse_levels(depth, alpha, mass);
  double worst = b.count() == exact.size() ? 0.0 : INFINITY;
  for (std::size_t v = 0; v < std::min(b.count(), exact.size()); ++v) {
    worst = std::max(worst, std::abs(b.energies[static_cast<Eigen::Index>(v)] - exact[v]));
  }
  const double s = seconds_since(t0);
  return {worst < 1e-6 && s < 10.0,
          fmt("%zu levels, max |E - E_exact| = %.2e a.u. (< 1e-6), %.2f s (< 10 s)", b.count(), worst, s)};
}

Outcome unitarity() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig c = shipped("h2plus_a");
  const RadialGrid g = c.radial_grid();
  const PotentialSet pot = c.potentials();
  const PulseContour contour = c.contour();
  const auto basis = solve_bound(g, pot);

  SplitOperatorPropagator driven(g, pot, AbsorbingPotential{}, [contour](double t) { return contour.field(t); }, c.run.dt);
  auto psi = initial_state(basis, 8);
  for (int k = 0; k < 10000; ++k) driven.step(psi);
  const double drift = std::abs(psi.norm(g.spacing()) - 1.0);

  SplitOperatorPropagator fwd(g, pot, AbsorbingPotential{}, nullptr, c.run.dt);
  SplitOperatorPropagator bwd(g, pot, AbsorbingPotential{}, nullptr, -c.run.dt);
  ChannelWavepacket psi0{VectorXcd(static_cast<Eigen::Index>(g.size())), VectorXcd::Zero(static_cast<Eigen::Index>(g.size())), 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i) - 3.0;
    psi0.chi1[static_cast<Eigen::Index>(i)] = std::exp(-x * x / 0.36) * std::exp(cplx(0.0, x));
  }
  psi0.chi1 /= std::sqrt(psi0.norm(g.spacing()));
  auto back = psi0;
  for (int k = 0; k < 10000; ++k) fwd.step(back);
  for (int k = 0; k < 10000; ++k) bwd.step(back);
  const double residual =
      std::sqrt(((back.chi1 - psi0.chi1).squaredNorm() + back.chi2.squaredNorm()) * g.spacing());
  const double s = seconds_since(t0);
  return {drift < 1e-10 && residual < 1e-8 && s < 60.0,
          fmt("norm drift %.2e (< 1e-10) over 1e4 driven steps, time-reversal residual %.2e (< 1e-8), %.1f s (< 60 s)",
              drift, residual, s)};
}

Outcome two_level_oracles() {
  // Grid propagator on two flat channels and the 2x2 integrator against sin^2.
  double grid_err = 0.0;
  {
    const RadialGrid g(-20.0, 20.0, 256);
    const double mu = 1.5;
    const double e = 0.02;
    SplitOperatorPropagator p(g, oracle::flat_set(1.0, mu), AbsorbingPotential{}, [e](double) { return e; }, 0.1);
    ChannelWavepacket psi{VectorXcd(256), VectorXcd::Zero(256), 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.point(i);
      psi.chi1[static_cast<Eigen::Index>(i)] = std::exp(-x * x / 4.0) * std::exp(cplx(0.0, 0.5 * x));
    }
    psi.chi1 /= std::sqrt(psi.norm(g.spacing()));
    for (int k = 1; k <= 5; ++k) {
      psi = propagate_to(p, psi, 20.0);
      const double s = std::sin(mu * e * 20.0 * k);
      grid_err = std::max(grid_err, std::abs(psi.chi2.squaredNorm() * g.spacing() - s * s));
    }
  }
  double magnus_err = 0.0;
  for (const double d : {0.0, 0.05, -0.2}) {
    const Matrix2cd h = rabi_hamiltonian(0.1, d);
    TwoLevelState s;
    double t = 0.0;
    for (int k = 0; k < 10; ++k) {
      s = magnus4([&](double) { return h; }, s, t, t + 13.7, 50);
      t += 13.7;
      magnus_err = std::max(magnus_err, std::abs(std::norm(s.psi[1]) - rabi_probability(0.1, d, t)));
    }
  }
  double worst_ratio = 0.0;
  for (const double omega : {0.99, 1.0, 1.01}) {
    for (const double field : {0.005, 0.01}) {
      const double split = two_level_quasienergy_splitting(1.0, 1.0, field, omega);
      const double margin = field * field / (1.0 + omega);
      worst_ratio = std::max(worst_ratio, std::abs(split - generalized_rabi(field, 1.0 - omega)) / margin);
    }
  }
  return {grid_err < 1e-8 && magnus_err < 1e-8 && worst_ratio < 1.0,
          fmt("Rabi error grid %.2e, 2x2 %.2e (< 1e-8); Floquet splitting off generalized Rabi by %.2f of the RWA margin (< 1)",
              grid_err, magnus_err, worst_ratio)};
}

Outcome ep_locator() {
  EpSearchOptions opt;
  opt.tol_x = 1e-7;
  opt.tol_y = 1e-7;
  const auto c = locate_ep(analytic_family_separation, SearchBox{-0.37, 0.51, -0.43, 0.29}, opt);
  const double dist = std::hypot(c.x, c.y);
  return {c.status == EpStatus::found && dist < 1e-6 && std::abs(c.exponent - 0.5) <= 0.1,
          fmt("status %s, |(x, y) - EP| = %.2e (< 1e-6), splitting exponent %.3f (0.5 +- 0.1)",
              to_string(c.status), dist, c.exponent)};
}

Outcome asymmetric_flip() {
  const FlipLoop loop;
  const double duration = 800.0;
  const auto h0 = follow_loop_branch(loop, 0, duration);
  const auto h1 = follow_loop_branch(loop, 1, duration);
  const auto& calm = h0.integrated_width <= h1.integrated_width ? h0 : h1;
  const std::size_t target = calm.end;
  const auto a = flip_asymmetry_model(loop, duration, 0);
  const auto b = flip_asymmetry_model(loop, duration, 1);
  const double leak = std::max(1.0 - a.branch_share[target], 1.0 - b.branch_share[target]);
  // Exactly one start changes branch label over the loop.
  const bool one_way = (a.final_branch != 0) != (b.final_branch != 1);
  return {loop.encloses_ep() && a.final_branch == target && b.final_branch == target && one_way && leak < 0.05,
          fmt("less dissipative branch ends as %zu; start 0 ends on %zu, start 1 ends on %zu, leakage %.2e (< 0.05)",
              target, a.final_branch, b.final_branch, leak)};
}

Outcome adiabatic_formula() {
  LossyPulse slow;
  slow.duration = 200.0;
  LossyPulse fast;
  fast.duration = 2.0;
  const double es = exact_pdiss(slow);
  const double ef = exact_pdiss(fast);
  const double rs = std::abs(adiabatic_pdiss(slow) - es) / es;
  const double rf = std::abs(adiabatic_pdiss(fast) - ef) / ef;
  return {rs < 0.05 && rf > 0.2,
          fmt("relative deviation slow (T = 200) %.3f (< 0.05), fast (T = 2) %.3f (> 0.2)", rs, rf)};
}

Outcome h2plus_runs() {
  const auto a = run_propagation(shipped("h2plus_a"), false).summary;
  const auto d = run_propagation(shipped("h2plus_d"), false).summary;
  const std::size_t dom = dominant_level(a.final_populations);
  const double ft = d.fractions ? d.fractions->target : 1.0;
  return {a.final_populations.dissociated > 0.5 && dom == 8 && ft < 0.8,
          fmt("(a) P_diss %.4f (> 0.5), dominant surviving v%zu (v8); (d) target fraction %.4f (< 0.8)",
              a.final_populations.dissociated, dom, ft)};
}

Outcome duration_scans() {
  std::string detail;
  bool pass = true;
  {
    const std::vector<double> t{2315.0, 5000.0, 10000.0};
    const auto rows = duration_scan(shipped("h2plus_d"), t);
    double fmax = 0.0;
    bool rising = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      fmax = std::max(fmax, rows[k].fractions ? rows[k].fractions->target : 1.0);
      if (k > 0 && rows[k].p_diss < rows[k - 1].p_diss) rising = false;
    }
    const double last = rows.back().p_diss;
    pass = pass && fmax < 0.8 && rising && last > 0.99;
    detail += fmt("H2+ (d) T = 2315..10000: max target fraction %.3f (< 0.8), P_diss rising to %.5f (> 0.99)", fmax, last);
  }
  {
    const std::vector<double> t{33073.0, 75000.0, 150000.0};
    const auto rows = duration_scan(shipped("na2_c"), t);
    bool rising = true;
    std::string fs;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const double f = rows[k].fractions ? rows[k].fractions->target : 0.0;
      if (k > 0 && f <= (rows[k - 1].fractions ? rows[k - 1].fractions->target : 0.0)) rising = false;
      fs += fmt(k ? ", %.3f" : "%.3f", f);
    }
    const double f_last = rows.back().fractions ? rows.back().fractions->target : 0.0;
    const double p_last = rows.back().p_diss;
    pass = pass && rising && f_last > 0.8 && p_last > 0.5;
    detail += fmt("; Na2 (c') T = 33073, 75000, 150000: target fraction %s rising to > 0.8, P_diss %.3f (> 0.5)",
                  fs.c_str(), p_last);
  }
  return {pass, detail};
}

Outcome stability() {
  std::string detail;
  bool pass = true;
  for (const char* name : {"h2plus_a", "na2_c"}) {
    const RunConfig c = shipped(name);
    const double p = run_propagation(c, false).summary.final_populations.dissociated;
    const auto d = convergence_deltas(c, p);
    pass = pass && d.half_step < 1e-5 && d.double_cap < 1e-3 && d.shifted_start < 1e-3;
    detail += fmt("%s%s: dt/2 %.1e (< 1e-5), 2A %.1e, R_start +-10%% %.1e (< 1e-3)", detail.empty() ? "" : "; ", name,
                  d.half_step, d.double_cap, d.shifted_start);
  }
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Morse bound-state oracle", morse_oracle},
      {"propagator unitarity and time reversal", unitarity},
      {"two-level Rabi and Floquet oracles", two_level_oracles},
      {"EP locator on the analytic 2x2 family", ep_locator},
      {"asymmetric flip on the lossy 2x2 loop", asymmetric_flip},
      {"adiabatic formula slow vs fast", adiabatic_formula},
      {"H2+ runs (a) and (d)", h2plus_runs},
      {"duration scans H2+ (d) and Na2 (c')", duration_scans},
      {"numerical stability of P_diss", stability},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %zu %s  %s: %s\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
