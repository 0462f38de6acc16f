#pragma once

// Electronic curves eps1(R) (bound channel), eps2(R) (repulsive channel) and
// the transition dipole mu12(R), either from tabulated files or from the
// built-in analytic stand-ins.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "epflip/errors.hpp"
#include "epflip/grid.hpp"
#include "epflip/units.hpp"

namespace epflip {

/// Natural cubic spline through (R_k, V_k). Outside [R_1, R_K] the curve is
/// held at its boundary value, so a table that reaches its asymptote is
/// extended by that constant.
class CurveTable {
public:
  CurveTable(std::vector<double> abscissae, std::vector<double> ordinates,
             std::string name = "curve")
      : r_(std::move(abscissae)), v_(std::move(ordinates)), name_(std::move(name)) {
    if (r_.size() != v_.size()) throw ConfigError(name_, "abscissa/ordinate count mismatch");
    if (r_.size() < 4) throw ConfigError(name_, "need at least 4 points, got " + std::to_string(r_.size()));
    for (std::size_t k = 1; k < r_.size(); ++k) {
      if (!(r_[k] > r_[k - 1])) {
        throw ConfigError(name_, "abscissae not strictly increasing at row " + std::to_string(k + 1));
      }
    }
    for (std::size_t k = 0; k < r_.size(); ++k) {
      if (!std::isfinite(r_[k]) || !std::isfinite(v_[k])) {
        throw ConfigError(name_, "non-finite value at row " + std::to_string(k + 1));
      }
    }
    // GSL's default handler aborts; errors are reported through return codes.
    static const bool handler_off = [] {
      gsl_set_error_handler_off();
      return true;
    }();
    (void)handler_off;
    spline_.reset(gsl_spline_alloc(gsl_interp_cspline, r_.size()));
    if (gsl_spline_init(spline_.get(), r_.data(), v_.data(), r_.size()) != GSL_SUCCESS) {
      throw ConfigError(name_, "spline construction failed");
    }
  }

  CurveTable(const CurveTable& other) : CurveTable(other.r_, other.v_, other.name_) {}
  CurveTable(CurveTable&&) noexcept = default;
  CurveTable& operator=(CurveTable other) noexcept {
    std::swap(r_, other.r_);
    std::swap(v_, other.v_);
    std::swap(name_, other.name_);
    std::swap(spline_, other.spline_);
    return *this;
  }

  double operator()(double r) const {
    if (r <= r_.front()) return v_.front();
    if (r >= r_.back()) return v_.back();
    // A null accelerator keeps evaluation re-entrant.
    return gsl_spline_eval(spline_.get(), r, nullptr);
  }

  double second_derivative(double r) const {
    if (r <= r_.front() || r >= r_.back()) return 0.0;
    return gsl_spline_eval_deriv2(spline_.get(), r, nullptr);
  }

  const std::vector<double>& abscissae() const noexcept { return r_; }
  const std::vector<double>& ordinates() const noexcept { return v_; }
  double front_value() const noexcept { return v_.front(); }
  double back_value() const noexcept { return v_.back(); }
  const std::string& name() const noexcept { return name_; }

private:
  struct SplineDeleter {
    void operator()(gsl_spline* s) const noexcept { gsl_spline_free(s); }
  };

  std::vector<double> r_;
  std::vector<double> v_;
  std::string name_;
  std::unique_ptr<gsl_spline, SplineDeleter> spline_;
};

/// Two whitespace-separated columns (R, value), '#' starts a comment.
inline CurveTable parse_curve(std::istream& in, const std::string& name) {
  std::vector<double> r;
  std::vector<double> v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    double a = 0.0;
    double b = 0.0;
    std::string extra;
    if (!(row >> a >> b)) {
      throw ConfigError(name, "line " + std::to_string(line_no) + ": expected two numeric columns");
    }
    if (row >> extra) {
      throw ConfigError(name, "line " + std::to_string(line_no) + ": unexpected trailing text '" + extra + "'");
    }
    if (!r.empty() && !(a > r.back())) {
      throw ConfigError(name, "line " + std::to_string(line_no) + ": abscissae must be strictly increasing");
    }
    r.push_back(a);
    v.push_back(b);
  }
  return CurveTable(std::move(r), std::move(v), name);
}

inline CurveTable load_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open curve file");
  return parse_curve(in, path);
}

/// Electronic structure input of the two-channel model.
struct PotentialSet {
  std::string name;
  std::function<double(double)> eps1;
  std::function<double(double)> eps2;
  std::function<double(double)> dipole;
  double mass = 0.0;
  double asymptote1 = 0.0;
  double asymptote2 = 0.0;

  VectorXd sample_eps1(const RadialGrid& g) const { return sample(eps1, g); }
  VectorXd sample_eps2(const RadialGrid& g) const { return sample(eps2, g); }
  VectorXd sample_dipole(const RadialGrid& g) const { return sample(dipole, g); }

private:
  static VectorXd sample(const std::function<double(double)>& f, const RadialGrid& g) {
    VectorXd out(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) out[static_cast<Eigen::Index>(i)] = f(g.point(i));
    return out;
  }
};

/// Morse curve D (1 - exp(-a (R - R_e)))^2 - D + offset; asymptote = offset.
struct MorseCurve {
  double depth;
  double r_eq;
  double alpha;
  double offset = 0.0;

  double operator()(double r) const noexcept {
    const double y = 1.0 - std::exp(-alpha * (r - r_eq));
    return depth * y * y - depth + offset;
  }
};

namespace h2plus {
inline constexpr double kDepth = 0.102634;
inline constexpr double kEquilibrium = 2.0;
inline constexpr double kMorseAlpha = 0.72;
inline constexpr double kReducedMass = 918.076;
/// eps2 = kRepulsionScale exp(-kRepulsionRate R) / R, fitted to the
/// 2p sigma_u curve at R = 2 and R = 4 bohr.
inline constexpr double kRepulsionScale = 2.047;
inline constexpr double kRepulsionRate = 0.5622;
inline constexpr double kDipoleSaturation = 10.0;
}  // namespace h2plus

/// H2+ stand-in: Morse 1s sigma_g, exponential-over-R 2p sigma_u sharing
/// the zero asymptote, dipole (R/2)(1 + (R/R_c)^8)^(-1/8).
inline PotentialSet builtin_h2plus() {
  using namespace h2plus;
  PotentialSet p;
  p.name = "h2plus";
  p.eps1 = MorseCurve{kDepth, kEquilibrium, kMorseAlpha, 0.0};
  p.eps2 = [](double r) { return kRepulsionScale * std::exp(-kRepulsionRate * r) / r; };
  p.dipole = [](double r) {
    return 0.5 * r * std::pow(1.0 + std::pow(r / kDipoleSaturation, 8), -0.125);
  };
  p.mass = kReducedMass;
  p.asymptote1 = 0.0;
  p.asymptote2 = 0.0;
  return p;
}

namespace na2 {
inline constexpr double kDepth = 7.9e-4;
inline constexpr double kEquilibrium = 9.7;
inline constexpr double kMorseAlpha = 0.395;
inline constexpr double kReducedMass = 20953.89;
inline constexpr double kDipole = 8.0;
/// 3S + 3P asymptote above 3S + 3S.
inline constexpr double kUpperAsymptote = 0.07726;
/// Vertical gap eps2(R_e) - eps1(R_e), a 561.84 nm photon.
inline constexpr double kVerticalGap = units::kWavelengthEnergy / 561.84;
/// eps2 = kUpperAsymptote + C tanh(S exp(-kUpperRate (R - R_e)) / C) with
/// C = kUpperCeiling; the tanh caps the inner wall at C above the asymptote.
inline constexpr double kUpperRate = 1.3;
inline constexpr double kUpperCeiling = 0.3;
inline double upper_scale() {
  return kUpperCeiling * std::atanh((kVerticalGap - kUpperAsymptote - kDepth) / kUpperCeiling);
}
}  // namespace na2

/// Na2 stand-in: shallow Morse lower triplet, exponential repulsive upper
/// curve with a 561.84 nm vertical gap at R_e, constant dipole.
inline PotentialSet builtin_na2() {
  using namespace na2;
  PotentialSet p;
  p.name = "na2";
  p.eps1 = MorseCurve{kDepth, kEquilibrium, kMorseAlpha, 0.0};
  p.eps2 = [s = upper_scale()](double r) {
    return kUpperAsymptote + kUpperCeiling * std::tanh(s * std::exp(-kUpperRate * (r - kEquilibrium)) / kUpperCeiling);
  };
  p.dipole = [](double) { return kDipole; };
  p.mass = kReducedMass;
  p.asymptote1 = 0.0;
  p.asymptote2 = kUpperAsymptote;
  return p;
}

/// Potential set from three curve files. Asymptotes are the last tabulated
/// energies.
inline PotentialSet potentials_from_files(const std::string& eps1_path,
                                          const std::string& eps2_path,
                                          const std::string& dipole_path, double mass) {
  if (!(mass > 0.0)) throw ConfigError("mass", "reduced mass must be > 0");
  auto e1 = std::make_shared<const CurveTable>(load_curve(eps1_path));
  auto e2 = std::make_shared<const CurveTable>(load_curve(eps2_path));
  auto mu = std::make_shared<const CurveTable>(load_curve(dipole_path));
  PotentialSet p;
  p.name = "files";
  p.eps1 = [e1](double r) { return (*e1)(r); };
  p.eps2 = [e2](double r) { return (*e2)(r); };
  p.dipole = [mu](double r) { return (*mu)(r); };
  p.mass = mass;
  p.asymptote1 = e1->back_value();
  p.asymptote2 = e2->back_value();
  return p;
}

/// Structural checks on a potential set over a grid. Throws ConfigError
/// naming the failing curve.
inline void validate_potentials(const PotentialSet& p, const RadialGrid& grid) {
  const VectorXd e1 = p.sample_eps1(grid);
  const VectorXd e2 = p.sample_eps2(grid);
  const VectorXd mu = p.sample_dipole(grid);
  if (!e1.allFinite()) throw ConfigError("eps1", "non-finite on the grid");
  if (!e2.allFinite()) throw ConfigError("eps2", "non-finite on the grid");
  if (!mu.allFinite()) throw ConfigError("dipole", "non-finite on the grid");
  if (!(e1.minCoeff() < p.asymptote1)) {
    throw ConfigError("eps1", "no minimum below the asymptote; bound states cannot exist");
  }
  for (Eigen::Index i = 1; i < e2.size(); ++i) {
    // Equal neighbours are allowed only once the curve sits on its asymptote
    // to rounding.
    const bool flat = e2[i] == e2[i - 1] && std::abs(e2[i] - p.asymptote2) <= 1e-14 * std::max(1.0, std::abs(p.asymptote2));
    if (!(e2[i] < e2[i - 1]) && !flat) {
      throw ConfigError("eps2", "not strictly decreasing at R = " + std::to_string(grid.point(static_cast<std::size_t>(i))));
    }
  }
  if (!(e2[e2.size() - 1] >= p.asymptote2)) {
    throw ConfigError("eps2", "drops below its asymptote on the grid");
  }
  if (!(p.mass > 0.0)) throw ConfigError("mass", "reduced mass must be > 0");
}

}  // namespace epflip
