#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "epflip/config.hpp"
#include "epflip/units.hpp"

using namespace epflip;

TEST(Units, IntensityToField) {
  EXPECT_EQ(units::intensity_to_field(0.0), 0.0);
  EXPECT_DOUBLE_EQ(units::intensity_to_field(3.50945e16), 1.0);
  // sqrt(0.3949e13 / 3.50945e16) by hand: 1.06078e-2
  EXPECT_NEAR(units::intensity_to_field(0.3949e13), 1.06078e-2, 1e-6);
  EXPECT_LT(units::intensity_to_field(1e12), units::intensity_to_field(2e12));
  EXPECT_THROW(units::intensity_to_field(-1.0), DomainError);
}

TEST(Units, WavelengthToOmega) {
  EXPECT_DOUBLE_EQ(units::wavelength_to_omega(45.5634), 1.0);
  EXPECT_NEAR(units::wavelength_to_omega(442.26), 0.103025, 1e-6);
  EXPECT_DOUBLE_EQ(units::wavelength_to_omega(911.268), 0.05);
  EXPECT_THROW(units::wavelength_to_omega(0.0), DomainError);
  EXPECT_THROW(units::wavelength_to_omega(-420.0), DomainError);
}

TEST(Units, RoundTrips) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 1000.0);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng);
    EXPECT_NEAR(units::field_to_intensity(units::intensity_to_field(x * 1e12)) / (x * 1e12), 1.0, 1e-12);
    EXPECT_NEAR(units::omega_to_wavelength(units::wavelength_to_omega(x)) / x, 1.0, 1e-12);
    EXPECT_NEAR(units::au_to_fs(units::fs_to_au(x)) / x, 1.0, 1e-12);
    EXPECT_NEAR(units::hartree_to_ev(units::ev_to_hartree(x)) / x, 1.0, 1e-12);
  }
}

TEST(Units, ConstantsPositive) {
  EXPECT_GT(units::kAuTimeSeconds, 0.0);
  EXPECT_GT(units::kHartreeEv, 0.0);
  EXPECT_GT(units::kAuIntensity, 0.0);
  EXPECT_GT(units::kWavelengthEnergy, 0.0);
}

TEST(Units, PaperDurations) {
  // 56 fs ~ 2315 a.u. and 800 fs ~ 33073 a.u.
  EXPECT_NEAR(units::fs_to_au(56.0), 2315.0, 1.0);
  EXPECT_NEAR(units::fs_to_au(800.0), 33073.0, 1.0);
}

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test");
}

std::string error_field(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, AcceptsOrderedGrid) {
  const auto c = parse("[grid]\nr_min = 0.5\nr_max = 25\n[cap]\nr_start = 20\n");
  EXPECT_EQ(c.grid.r_min, 0.5);
  EXPECT_EQ(c.cap.r_start, 20.0);
  EXPECT_EQ(c.grid.r_max, 25.0);
}

TEST(Config, RejectsStartBeyondGrid) {
  EXPECT_EQ(error_field("[cap]\nr_start = 30\n"), "cap.r_start");
}

TEST(Config, RunAEchoesValues) {
  const auto c = parse("[pulse]\ni_max = 0.3e13\nlambda0 = 420\ndelta_lambda = 30\n[run]\nv_initial = 8\n");
  EXPECT_EQ(c.pulse.i_max, 0.3e13);
  EXPECT_EQ(c.pulse.lambda0, 420.0);
  EXPECT_EQ(c.pulse.delta_lambda, 30.0);
  EXPECT_EQ(c.run.v_initial, 8u);
  EXPECT_EQ(c.run.target(), 7u);
  const std::string echo = echo_config(c);
  EXPECT_NE(echo.find("lambda0 = 420\n"), std::string::npos);
  EXPECT_NE(echo.find("v_initial = 8"), std::string::npos);
}

TEST(Config, NamedDiagnostics) {
  EXPECT_EQ(error_field("[grid]\npoints = 1000\n"), "grid.points");
  EXPECT_EQ(error_field("[grid]\nr_max = abc\n"), "grid.r_max");
  EXPECT_EQ(error_field("[run]\ndt = -1\n"), "run.dt");
  EXPECT_EQ(error_field("[run]\ndt = 0\n"), "run.dt");
  EXPECT_EQ(error_field("[pulse]\nt_total = 0\n"), "pulse.t_total");
  EXPECT_EQ(error_field("[run]\nv_initial = -2\n"), "run.v_initial");
  EXPECT_EQ(error_field("[pulse]\ncolour = red\n"), "pulse.colour");
  EXPECT_EQ(error_field("[laser]\ni_max = 1\n"), "laser");
  EXPECT_EQ(error_field("[molecule]\npreset = co2\n"), "molecule.preset");
  EXPECT_EQ(error_field("[molecule]\npreset = files\n"), "molecule.eps1");
  EXPECT_EQ(error_field("[grid\nr_min = 1\n"), "test");
  EXPECT_EQ(error_field("[pulse]\nclockwise = maybe\n"), "pulse.clockwise");
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/run.ini"), ConfigError);
}

TEST(Config, EchoRoundTrip) {
  RunConfig c = preset_config("na2");
  c.pulse.i_max = 0.123456789e9;
  c.run.v_target = 4;
  c.floquet.settings.effective_frequency = false;
  c.output.prefix = "x";
  const std::string first = echo_config(c);
  const RunConfig back = parse(first);
  EXPECT_EQ(echo_config(back), first);
  EXPECT_EQ(back.pulse.i_max, c.pulse.i_max);
  EXPECT_EQ(back.run.v_target, c.run.v_target);
  EXPECT_FALSE(back.floquet.settings.effective_frequency);
}

TEST(Config, PresetDefaults) {
  const auto c = preset_config("h2plus");
  EXPECT_EQ(c.floquet.settings.n_photon, 6);
  EXPECT_TRUE(c.floquet.settings.effective_frequency);
  EXPECT_EQ(c.grid.points, 1024u);
  EXPECT_NO_THROW(validate_step(c, c.potentials()));
  const auto n = preset_config("na2");
  EXPECT_NO_THROW(validate_step(n, n.potentials()));
}

TEST(Config, StepHeuristic) {
  RunConfig c = preset_config("h2plus");
  c.run.dt = 1.0;
  EXPECT_THROW(validate_step(c, c.potentials()), ConfigError);
  c = preset_config("h2plus");
  c.run.v_initial = 200;
  EXPECT_THROW(validate_step(c, c.potentials()), ConfigError);
}

TEST(Config, ShippedConfigsLoad) {
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(EPFLIP_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    SCOPED_TRACE(entry.path().string());
    const RunConfig c = load_config(entry.path().string());
    EXPECT_NO_THROW(validate_step(c, c.potentials()));
    ++n;
  }
  EXPECT_GE(n, 10u);
}
