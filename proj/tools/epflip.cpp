// epflip: propagation, duration scans, Floquet spectra, EP searches and
// adiabatic predictions for the two-channel photodissociation model.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "epflip/config.hpp"
#include "epflip/ep_locator.hpp"
#include "epflip/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = epflip::detail::trim(item);
    if (item.empty()) continue;
    out.push_back(epflip::detail::parse_double(field, item));
  }
  return out;
}

epflip::SearchBox parse_box(const std::string& text) {
  const auto v = parse_list(text, "--box");
  if (v.size() != 4) throw epflip::ConfigError("--box", "expected x_lo,x_hi,y_lo,y_hi");
  epflip::SearchBox b{v[0], v[1], v[2], v[3]};
  if (!(b.width() > 0.0) || !(b.height() > 0.0)) throw epflip::ConfigError("--box", "empty box");
  return b;
}

epflip::RunConfig load(const std::string& path, const std::string& out_dir) {
  epflip::RunConfig c = path.empty() ? epflip::preset_config("h2plus") : epflip::load_config(path);
  if (!out_dir.empty()) c.output.dir = out_dir;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exceptional-point control of photodissociation: propagation and Floquet analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", epflip::kVersion);

  std::string config_path;
  std::string out_dir;
  auto common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", config_path, "INI run configuration");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, "Output directory (overrides [output] dir)");
  };

  auto* propagate = app.add_subcommand("propagate", "Propagate one run and write its trace and summary");
  common(propagate, true);
  bool check_convergence = false;
  propagate->add_flag("--check-convergence", check_convergence,
                      "Also rerun with dt/2, doubled CAP strength and shifted CAP onset");

  auto* scan = app.add_subcommand("duration-scan", "Final probabilities as a function of T_tot");
  common(scan, true);
  std::string durations_text;
  std::size_t parallel = 1;
  scan->add_option("--durations", durations_text, "Comma-separated pulse durations (a.u.)")->required();
  scan->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* floquet = app.add_subcommand("floquet", "Quasienergy spectrum at fixed intensity and wavelength");
  common(floquet, true);
  double intensity = 0.0;
  double wavelength = 0.0;
  floquet->add_option("--intensity", intensity, "Intensity (W/cm^2)")->required();
  floquet->add_option("--wavelength", wavelength, "Wavelength (nm)")->required();

  auto* ep = app.add_subcommand("ep-search", "Locate the exceptional point of v_initial and v_target");
  common(ep, false);
  std::string box_text;
  std::string model = "molecule";
  double tol_x = -1.0;
  double tol_y = -1.0;
  std::size_t ep_grid = 9;
  ep->add_option("--box", box_text, "x_lo,x_hi,y_lo,y_hi (molecule: W/cm^2 and nm)")->required();
  ep->add_option("--model", model, "molecule or analytic")->check(CLI::IsMember({"molecule", "analytic"}));
  ep->add_option("--tol-x", tol_x, "Parameter tolerance along x");
  ep->add_option("--tol-y", tol_y, "Parameter tolerance along y");
  ep->add_option("--grid", ep_grid, "Grid points per axis and level")->check(CLI::Range(3, 101));

  auto* predict = app.add_subcommand("adiabatic-predict", "Adiabatic P_diss from the tracked Floquet width");
  common(predict, true);
  bool compare = false;
  predict->add_flag("--compare", compare, "Also propagate and report both P_diss values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*propagate) {
      epflip::RunConfig c = load(config_path, out_dir);
      validate_step(c, c.potentials());
      epflip::ensure_directory(c.output.dir);
      epflip::RunResult r = epflip::run_propagation(c, true);
      if (check_convergence) {
        r.summary.convergence = epflip::convergence_deltas(c, r.summary.final_populations.dissociated);
      }
      epflip::write_trace_csv(epflip::output_path(c, "_trace.csv"), c, r.trace);
      c.contour().write_csv(epflip::output_path(c, "_contour.csv"), 1001);
      epflip::write_summary(epflip::output_path(c, "_summary.ini"), r.summary);
      std::cout << r.summary.text();
    } else if (*scan) {
      epflip::RunConfig c = load(config_path, out_dir);
      validate_step(c, c.potentials());
      epflip::ensure_directory(c.output.dir);
      const auto rows = epflip::duration_scan(c, parse_list(durations_text, "--durations"), parallel);
      const std::string path = epflip::output_path(c, "_scan.csv");
      epflip::write_scan_csv(path, c, rows);
      std::cout << "t_total,p_diss,f_initial,f_target,f_other\n";
      for (const auto& row : rows) {
        std::cout << row.duration << ',' << row.p_diss;
        if (row.fractions) std::cout << ',' << row.fractions->initial << ',' << row.fractions->target << ',' << row.fractions->other;
        std::cout << '\n';
      }
      std::cout << "wrote " << path << '\n';
    } else if (*floquet) {
      epflip::RunConfig c = load(config_path, out_dir);
      epflip::ensure_directory(c.output.dir);
      const auto s = epflip::floquet_spectrum(c, intensity, wavelength);
      const std::string path = epflip::output_path(c, "_spectrum.csv");
      const auto basis = epflip::solve_bound(c.radial_grid(), c.potentials());
      const double ref = basis.energies[static_cast<Eigen::Index>(c.run.v_initial)];
      std::ostringstream header;
      header << epflip::output_header(c) << "# intensity = " << intensity << "\n# wavelength = " << wavelength << '\n';
      epflip::write_spectrum_csv(s, path, ref, header.str());
      for (std::size_t j = 0; j < s.labels.size(); ++j) {
        if (s.labels[j]) {
          const auto e = s.values[static_cast<Eigen::Index>(j)];
          std::cout << "v" << *s.labels[j] << ": E = " << e.real() << " " << e.imag() << "i, width = " << -2.0 * e.imag() << '\n';
        }
      }
      std::cout << "wrote " << path << " (" << s.values.size() << " quasienergies)\n";
    } else if (*ep) {
      const epflip::SearchBox box = parse_box(box_text);
      epflip::EpSearchOptions opt;
      opt.grid = ep_grid;
      epflip::EpCandidate cand;
      std::string dir = out_dir;
      std::string prefix = "ep";
      if (model == "analytic") {
        opt.tol_x = tol_x > 0.0 ? tol_x : 1e-7;
        opt.tol_y = tol_y > 0.0 ? tol_y : 1e-7;
        cand = epflip::locate_ep(epflip::analytic_family_separation, box, opt);
        cand.label_a = "+";
        cand.label_b = "-";
        if (dir.empty()) dir = ".";
      } else {
        if (config_path.empty()) throw epflip::ConfigError("--config", "required for --model molecule");
        const epflip::RunConfig c = load(config_path, out_dir);
        opt.tol_x = tol_x > 0.0 ? tol_x : 1e-4 * box.width();
        opt.tol_y = tol_y > 0.0 ? tol_y : 1e-4 * box.height();
        opt.separation_tol = 1e-9;
        cand = epflip::molecule_ep_search(c, box, opt);
        dir = c.output.dir;
        prefix = c.output.prefix;
      }
      epflip::ensure_directory(dir);
      const std::string path = (std::filesystem::path(dir) / (prefix + "_ep.txt")).string();
      auto out = epflip::open_output(path);
      out << "model = " << model << '\n' << cand.report();
      std::cout << cand.report() << "wrote " << path << '\n';
    } else if (*predict) {
      epflip::RunConfig c = load(config_path, out_dir);
      epflip::ensure_directory(c.output.dir);
      const auto p = epflip::adiabatic_prediction(c);
      epflip::write_track_csv(epflip::output_path(c, "_adiabatic.csv"), c, p.track);
      std::cout.precision(10);
      std::cout << "adiabatic p_diss = " << p.p_diss << '\n';
      std::cout << "ambiguous samples = " << p.track.ambiguous_count() << " of " << p.track.times.size() << '\n';
      if (p.track.final_level) std::cout << "final level = v" << *p.track.final_level << '\n';
      if (compare) {
        validate_step(c, c.potentials());
        const auto r = epflip::run_propagation(c, false);
        const double exact = r.summary.final_populations.dissociated;
        std::cout << "propagated p_diss = " << exact << '\n';
        std::cout << "relative difference = " << std::abs(p.p_diss - exact) / std::max(exact, 1e-300) << '\n';
      }
    }
  } catch (const epflip::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const epflip::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const epflip::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
