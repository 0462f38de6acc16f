#pragma once

// Laboratory <-> atomic unit conversions. Everything inside the library is
// in atomic units; these helpers are used only at I/O boundaries.

#include <cmath>

#include "epflip/errors.hpp"

namespace epflip::units {

inline constexpr double kAuTimeSeconds = 2.418884e-17;
inline constexpr double kHartreeEv = 27.2114;
/// Intensity whose peak field is 1 a.u., in W/cm^2.
inline constexpr double kAuIntensity = 3.50945e16;
/// E[a.u.] = kWavelengthEnergy / lambda[nm].
inline constexpr double kWavelengthEnergy = 45.5634;

inline constexpr double kPi = 3.14159265358979323846;

/// Peak field amplitude (a.u.) for an intensity in W/cm^2.
inline double intensity_to_field(double intensity) {
  if (!(intensity >= 0.0)) {
    throw DomainError("intensity_to_field: intensity must be >= 0");
  }
  return std::sqrt(intensity / kAuIntensity);
}

inline double field_to_intensity(double field) {
  if (!(field >= 0.0)) {
    throw DomainError("field_to_intensity: field amplitude must be >= 0");
  }
  return field * field * kAuIntensity;
}

/// Photon angular frequency (a.u.) for a wavelength in nm.
inline double wavelength_to_omega(double wavelength_nm) {
  if (!(wavelength_nm > 0.0)) {
    throw DomainError("wavelength_to_omega: wavelength must be > 0");
  }
  return kWavelengthEnergy / wavelength_nm;
}

inline double omega_to_wavelength(double omega) {
  if (!(omega > 0.0)) {
    throw DomainError("omega_to_wavelength: frequency must be > 0");
  }
  return kWavelengthEnergy / omega;
}

inline double fs_to_au(double fs) { return fs * 1e-15 / kAuTimeSeconds; }
inline double au_to_fs(double au) { return au * kAuTimeSeconds * 1e15; }

inline double ev_to_hartree(double ev) { return ev / kHartreeEv; }
inline double hartree_to_ev(double hartree) { return hartree * kHartreeEv; }

}  // namespace epflip::units
