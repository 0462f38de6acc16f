#pragma once

// Closed (intensity, wavelength) loop driven over a pulse of duration T:
//   I(t) = I_max sin(phi/2),  lambda(t) = lambda0 + s * dlambda sin(phi),
//   phi = 2 pi t / T,  s = +1 clockwise in the (I, lambda) plane.
// The field is E(t) = E0(t) cos(omega(t) t) with the phase taken literally.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>

#include "epflip/errors.hpp"
#include "epflip/units.hpp"

namespace epflip {

struct ContourPoint {
  double intensity;   // W/cm^2
  double wavelength;  // nm
};

class PulseContour {
public:
  PulseContour(double i_max, double lambda0, double delta_lambda, double t_total,
               bool clockwise = true)
      : i_max_(i_max), lambda0_(lambda0), delta_lambda_(delta_lambda), t_total_(t_total),
        clockwise_(clockwise) {
    if (!(i_max >= 0.0)) throw DomainError("PulseContour: I_max must be >= 0");
    if (!(t_total > 0.0)) throw DomainError("PulseContour: T_tot must be > 0");
    if (!(lambda0 > 0.0)) throw DomainError("PulseContour: lambda0 must be > 0");
    if (!(lambda0 - std::abs(delta_lambda) > 0.0)) {
      throw DomainError("PulseContour: wavelength would reach zero");
    }
  }

  double i_max() const noexcept { return i_max_; }
  double lambda0() const noexcept { return lambda0_; }
  double delta_lambda() const noexcept { return delta_lambda_; }
  double duration() const noexcept { return t_total_; }
  bool clockwise() const noexcept { return clockwise_; }

  ContourPoint point(double t) const {
    check(t, "contour_point");
    if (is_endpoint(t)) return {0.0, lambda0_};
    const double phi = phase_angle(t);
    return {i_max_ * std::sin(0.5 * phi), lambda0_ + signed_delta() * std::sin(phi)};
  }

  /// Peak field envelope E0(t) in a.u.
  double envelope(double t) const { return units::intensity_to_field(point(t).intensity); }

  /// omega(t) = 45.5634 / lambda(t).
  double omega(double t) const { return units::wavelength_to_omega(point(t).wavelength); }

  /// d omega / dt through the chain rule on lambda(t).
  double omega_rate(double t) const {
    check(t, "omega_rate");
    const double phi = phase_angle(t);
    const double lambda = point(t).wavelength;
    const double dlambda_dt = signed_delta() * std::cos(phi) * 2.0 * units::kPi / t_total_;
    return -units::kWavelengthEnergy / (lambda * lambda) * dlambda_dt;
  }

  /// d/dt (omega(t) t) = omega + t d omega/dt.
  double omega_eff(double t) const {
    check(t, "omega_eff");
    return omega(t) + t * omega_rate(t);
  }

  /// E0(t) cos(omega(t) t); exactly zero at both ends.
  double field(double t) const {
    check(t, "field_at");
    if (is_endpoint(t)) return 0.0;
    return envelope(t) * std::cos(omega(t) * t);
  }

  double operator()(double t) const { return field(t); }

  /// Writes (t, I, lambda, E0, omega, omega_eff) at `samples` equally spaced times.
  void write_csv(const std::string& path, std::size_t samples) const {
    std::ofstream out(path);
    if (!out) throw ConfigError(path, "cannot open for writing");
    out << "t,intensity,wavelength,e0,omega,omega_eff\n" << std::setprecision(12);
    const std::size_t n = samples < 2 ? 2 : samples;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = j + 1 == n ? t_total_ : t_total_ * static_cast<double>(j) / static_cast<double>(n - 1);
      const auto p = point(t);
      out << t << ',' << p.intensity << ',' << p.wavelength << ',' << envelope(t) << ','
          << omega(t) << ',' << omega_eff(t) << '\n';
    }
  }

private:
  double phase_angle(double t) const noexcept { return 2.0 * units::kPi * t / t_total_; }
  double signed_delta() const noexcept { return clockwise_ ? delta_lambda_ : -delta_lambda_; }
  bool is_endpoint(double t) const noexcept { return t == 0.0 || t == t_total_; }

  void check(double t, const char* what) const {
    if (!(t >= 0.0 && t <= t_total_)) {
      throw DomainError(std::string(what) + ": t outside [0, T_tot]");
    }
  }

  double i_max_;
  double lambda0_;
  double delta_lambda_;
  double t_total_;
  bool clockwise_;
};

}  // namespace epflip
