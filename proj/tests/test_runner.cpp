#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epflip/runner.hpp"

using namespace epflip;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig c = preset_config("h2plus");
  c.grid.points = 512;
  c.pulse.t_total = 300.0;
  c.run.sample_every = 50;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("epflip_runner_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EPFLIP_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Runner, ZeroIntensity) {
  RunConfig c = small_config();
  c.pulse.i_max = 0.0;
  const auto r = run_propagation(c, true);
  EXPECT_NEAR(r.summary.final_populations.dissociated, 0.0, 1e-10);
  EXPECT_NEAR(r.summary.final_populations.bound[8], 1.0, 1e-10);
  ASSERT_TRUE(r.summary.fractions.has_value());
  EXPECT_NEAR(r.summary.fractions->initial, 1.0, 1e-10);
}

TEST(Runner, TraceInvariants) {
  const auto r = run_propagation(small_config(), true);
  ASSERT_GE(r.trace.size(), 3u);
  EXPECT_EQ(r.trace.front().time, 0.0);
  EXPECT_EQ(r.trace.back().time, 300.0);
  for (const auto& rec : r.trace) {
    double sum = rec.populations.dissociated;
    for (const double p : rec.populations.bound) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0 + 1e-12);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_GE(rec.populations.dissociated, -1e-12);
    EXPECT_LE(rec.populations.dissociated, 1.0);
    if (rec.fractions) EXPECT_NEAR(rec.fractions->initial + rec.fractions->target + rec.fractions->other, 1.0, 1e-12);
  }
}

TEST(Runner, DissociationGrowsAfterPulse) {
  // Tail after the pulse: the field is zero, the CAP keeps removing flux.
  // Field-free levels are not exact eigenstates of the split-step map, so
  // their populations wobble at the 1e-10 level.
  const RunConfig c = small_config();
  const auto basis = solve_bound(c.radial_grid(), c.potentials());
  const PulseContour contour = c.contour();
  SplitOperatorPropagator prop(c.radial_grid(), c.potentials(), c.absorber(),
                               [contour](double t) { return t <= 300.0 ? contour.field(t) : 0.0; }, c.run.dt);
  auto psi = propagate_to(prop, initial_state(basis, 8), 300.0);
  double prev = populations(psi, basis).dissociated;
  for (int k = 0; k < 20; ++k) {
    psi = propagate_to(prop, psi, 20.0);
    const double p = populations(psi, basis).dissociated;
    EXPECT_GE(p, prev - 1e-9);
    prev = p;
  }
}

TEST(Runner, SummaryFeedsBack) {
  RunConfig c = small_config();
  c.pulse.i_max = 0.123e13;
  const auto r = run_propagation(c, false);
  std::istringstream in(r.summary.text());
  const RunConfig back = parse_config(in, "summary");
  EXPECT_EQ(echo_config(back), echo_config(c));
  EXPECT_EQ(run_propagation(back, false).summary.final_populations.dissociated,
            r.summary.final_populations.dissociated);
}

TEST(Runner, DurationScanDeterministic) {
  const auto rows = duration_scan(small_config(), {150.0, 150.0, 200.0});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].p_diss, rows[1].p_diss);
  EXPECT_EQ(rows[0].fractions->target, rows[1].fractions->target);
  EXPECT_EQ(rows[2].duration, 200.0);
  const auto par = duration_scan(small_config(), {150.0, 200.0}, 2);
  EXPECT_EQ(par[0].p_diss, rows[0].p_diss);
  EXPECT_EQ(par[1].p_diss, rows[2].p_diss);
  EXPECT_THROW(duration_scan(small_config(), {150.0}), ConfigError);
  EXPECT_THROW(duration_scan(small_config(), {150.0, -1.0}), ConfigError);
}

TEST(Runner, OutputsEmbedConfigAndAreByteIdentical) {
  const fs::path dir = scratch("files");
  RunConfig c = small_config();
  c.output.dir = dir.string();
  const auto a = run_propagation(c, true);
  write_trace_csv(output_path(c, "_a.csv"), c, a.trace);
  const auto b = run_propagation(c, true);
  write_trace_csv(output_path(c, "_b.csv"), c, b.trace);
  const std::string text = slurp(output_path(c, "_a.csv"));
  EXPECT_EQ(text, slurp(output_path(c, "_b.csv")));
  for (const char* key : {"# [grid]", "# points = 512", "# dt = 0.05", "# strength = 0.5", "# n_photon = 6",
                          "# epflip 1.0.0"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
  std::string header = "t,p_diss";
  for (std::size_t v = 0; v < a.trace.front().populations.bound.size(); ++v) header += ",p_" + std::to_string(v);
  header += ",f_initial,f_target,f_other,re_e_eff,im_e_eff\n";
  EXPECT_NE(text.find(header), std::string::npos);
}

TEST(Runner, ConvergenceDeltas) {
  RunConfig c = small_config();
  const double p = run_propagation(c, false).summary.final_populations.dissociated;
  const auto d = convergence_deltas(c, p);
  EXPECT_LT(d.half_step, 1e-5);
  EXPECT_LT(d.double_cap, 1e-3);
  EXPECT_LT(d.shifted_start, 1e-3);
}

TEST(Cli, PropagateWritesOutputs) {
  const fs::path dir = scratch("cli");
  std::ofstream(dir / "run.ini") << "[grid]\npoints = 512\n[pulse]\nt_total = 200\n[output]\nprefix = t\n";
  const std::string cfg = (dir / "run.ini").string();
  EXPECT_EQ(run_cli("propagate --config " + cfg + " --out-dir " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "t_trace.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "t_summary.ini"));
  EXPECT_TRUE(fs::exists(dir / "out" / "t_contour.csv"));
  EXPECT_EQ(run_cli("duration-scan --config " + cfg + " --durations 100,150 --parallel 1 --out-dir " +
                    (dir / "out").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "out" / "t_scan.csv"));
  EXPECT_EQ(run_cli("ep-search --model analytic --box=-0.3,0.4,-0.2,0.5 --out-dir " + (dir / "ep").string()), 0);
  EXPECT_NE(slurp((dir / "ep" / "ep_ep.txt").string()).find("status = found"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("codes");
  std::ofstream(dir / "bad.ini") << "[cap]\nr_start = 40\n";
  EXPECT_EQ(run_cli("propagate --config " + (dir / "bad.ini").string()), 2);
  EXPECT_EQ(run_cli("propagate"), 2);
  EXPECT_EQ(run_cli("propagate --config " + (dir / "missing.ini").string()), 2);
  EXPECT_EQ(run_cli("duration-scan --config " + (dir / "bad.ini").string() + " --durations 1,2"), 2);
  EXPECT_EQ(run_cli("ep-search --model analytic --box 1,2,3"), 2);
  // A curve with no level below its asymptote: the bound-state solve fails.
  std::ofstream e1(dir / "e1.dat");
  std::ofstream e2(dir / "e2.dat");
  std::ofstream mu(dir / "mu.dat");
  for (int k = 0; k <= 100; ++k) {
    const double r = 0.5 + 0.25 * k;
    e1 << r << ' ' << 0.5 + std::exp(-r) << '\n';
    e2 << r << ' ' << 1.0 + std::exp(-r) << '\n';
    mu << r << ' ' << 1.0 << '\n';
  }
  e1.close();
  e2.close();
  mu.close();
  std::ofstream(dir / "flat.ini") << "[molecule]\npreset = files\neps1 = " << (dir / "e1.dat").string()
                                  << "\neps2 = " << (dir / "e2.dat").string() << "\ndipole = "
                                  << (dir / "mu.dat").string() << "\nmass = 918\n[grid]\npoints = 256\n";
  EXPECT_EQ(run_cli("propagate --config " + (dir / "flat.ini").string() + " --out-dir " + dir.string()), 3);
}
