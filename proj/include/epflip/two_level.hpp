#pragma once

// Small driven 2x2 models: a fourth-order commutator-free Magnus integrator,
// the lossy loop that encircles an exceptional point (flip asymmetry), a
// lossy two-level pulse for checking the adiabatic dissociation formula, and
// closed-form Rabi expressions.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "epflip/errors.hpp"
#include "epflip/floquet.hpp"
#include "epflip/linalg.hpp"
#include "epflip/units.hpp"

namespace epflip {

using Eigen::Matrix2cd;
using Eigen::Vector2cd;

/// State of a lossy 2x2 evolution. `psi` is kept at unit norm and the
/// discarded scale accumulates in `log_norm`, so very large losses do not
/// underflow.
struct TwoLevelState {
  Vector2cd psi = Vector2cd(1.0, 0.0);
  double log_norm = 0.0;

  double norm() const { return std::exp(2.0 * log_norm) * psi.squaredNorm(); }
};

/// i d/dt psi = H(t) psi from t0 to t1 in `steps` CF4 steps (Gauss points
/// 1/2 -+ sqrt(3)/6). Exact for constant H.
template <class Hamiltonian>
TwoLevelState magnus4(const Hamiltonian& h, TwoLevelState s, double t0, double t1,
                      std::size_t steps) {
  if (steps == 0) throw DomainError("magnus4: steps must be >= 1");
  static const double r = std::sqrt(3.0) / 6.0;
  static const double a1 = 0.25 - r;
  static const double a2 = 0.25 + r;
  const double dt = (t1 - t0) / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    const Matrix2cd h1 = h(t + (0.5 - r) * dt);
    const Matrix2cd h2 = h(t + (0.5 + r) * dt);
    s.psi = linalg::expm_2x2(a2 * h1 + a1 * h2, dt) * s.psi;
    s.psi = linalg::expm_2x2(a1 * h1 + a2 * h2, dt) * s.psi;
    const double n = s.psi.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("magnus4: state lost (norm " + std::to_string(n) + ")");
    s.psi /= n;
    s.log_norm += std::log(n);
  }
  return s;
}

/// Right eigenvectors of a 2x2 matrix, columns ordered as eigenvalues_2x2.
inline Matrix2cd eigenvectors_2x2(const Matrix2cd& h) {
  const auto e = linalg::eigenvalues_2x2(h);
  Matrix2cd v;
  for (int j = 0; j < 2; ++j) {
    // (h - e) v = 0: take the better conditioned of the two rows.
    const Vector2cd a(h(0, 1), e[j] - h(0, 0));
    const Vector2cd b(e[j] - h(1, 1), h(1, 0));
    Vector2cd x = a.norm() >= b.norm() ? a : b;
    if (x.norm() == 0.0) x = j == 0 ? Vector2cd(1.0, 0.0) : Vector2cd(0.0, 1.0);
    v.col(j) = x.normalized();
  }
  return v;
}

// ---------------------------------------------------------------------------
// Rabi oscillation, H = [[-D/2, W/2], [W/2, D/2]].

inline double generalized_rabi(double rabi, double detuning) {
  return std::hypot(rabi, detuning);
}

/// Population in the upper state after time t, starting in the lower one.
inline double rabi_probability(double rabi, double detuning, double t) {
  const double w = generalized_rabi(rabi, detuning);
  if (w == 0.0) return 0.0;
  const double s = std::sin(0.5 * w * t);
  return rabi * rabi / (w * w) * s * s;
}

inline Matrix2cd rabi_hamiltonian(double rabi, double detuning) {
  Matrix2cd h;
  h << -0.5 * detuning, 0.5 * rabi, 0.5 * rabi, 0.5 * detuning;
  return h;
}

/// Floquet model of H(t) = [[0, -mu E0 cos wt], [-mu E0 cos wt, w0]]: the
/// two-channel model with one state per channel.
inline FloquetModel two_level_floquet_model(double level_gap, double dipole, int n_photon,
                                            double omega_lo, double omega_hi) {
  ChannelSpectra ch;
  ch.energies1 = VectorXd::Constant(1, 0.0);
  ch.energies2 = VectorXd::Constant(1, level_gap);
  ch.absorb1 = MatrixXd::Zero(1, 1);
  ch.absorb2 = MatrixXd::Zero(1, 1);
  ch.dipole = MatrixXd::Constant(1, 1, dipole);
  FloquetSettings s;
  s.n_photon = n_photon;
  s.window = 1e6;
  s.margin = 0.0;
  return FloquetModel(std::move(ch), s, 0.0, 0.0, omega_lo, omega_hi);
}

/// Splitting of the two quasienergies nearest to 0 (lower state, zero
/// photons) and to w0 - w (upper state, one photon absorbed).
inline double two_level_quasienergy_splitting(double level_gap, double dipole, double field,
                                              double omega, int n_photon = 6) {
  const FloquetModel m = two_level_floquet_model(level_gap, dipole, n_photon, omega, omega);
  const auto eig = linalg::general_eigen(m.matrix(field, omega), false);
  const double detuning = level_gap - omega;
  const double centre = 0.5 * detuning;
  // The pair straddling the middle of the two dressed levels.
  std::vector<double> re;
  for (Eigen::Index j = 0; j < eig.values.size(); ++j) re.push_back(eig.values[j].real());
  std::sort(re.begin(), re.end(), [&](double a, double b) { return std::abs(a - centre) < std::abs(b - centre); });
  if (re.size() < 2) throw NumericalError("two_level_quasienergy_splitting: spectrum too small");
  return std::abs(re[0] - re[1]);
}

// ---------------------------------------------------------------------------
// Lossy loop around an exceptional point.

/// H = [[-d/2, g sqrt(I)], [g sqrt(I), d/2 - i gamma I]] with the loop
/// I = I_max sin^2(theta/2), d = d0 + s dd sin(theta), theta in [0, 2 pi],
/// s = +1 clockwise in the (d, I) plane. EP at d = 0, I = (2 g / gamma)^2.
struct FlipLoop {
  double coupling = 0.5;
  double loss = 1.0;
  double i_max = 2.0;
  double detuning0 = 0.3;
  double detuning_amp = 1.0;
  bool clockwise = true;

  // sin^2 keeps the coupling sqrt(I) smooth where the loop leaves and
  // rejoins I = 0.
  double intensity(double theta) const {
    const double s = std::sin(0.5 * theta);
    return i_max * s * s;
  }
  double detuning(double theta) const {
    return detuning0 + (clockwise ? 1.0 : -1.0) * detuning_amp * std::sin(theta);
  }
  double ep_intensity() const { return std::pow(2.0 * coupling / loss, 2); }

  Matrix2cd at(double theta) const { return hamiltonian(detuning(theta), intensity(theta)); }

  Matrix2cd hamiltonian(double d, double intensity) const {
    const double c = coupling * std::sqrt(std::max(intensity, 0.0));
    Matrix2cd h;
    h << -0.5 * d, c, c, cplx(0.5 * d, -loss * intensity);
    return h;
  }

  /// True when the loop crosses d = 0 once below and once above the EP.
  bool encloses_ep() const {
    const double s = -detuning0 / detuning_amp;
    if (std::abs(s) >= 1.0) return false;
    const double a = std::asin(s);
    std::array<double, 2> th = {units::kPi - a, 2.0 * units::kPi + a};
    if (!clockwise) th = {-a, units::kPi + a};
    double lo = 1e300;
    double hi = -1e300;
    for (double t : th) {
      t = std::fmod(t + 4.0 * units::kPi, 2.0 * units::kPi);
      lo = std::min(lo, intensity(t));
      hi = std::max(hi, intensity(t));
    }
    return lo < ep_intensity() && ep_intensity() < hi;
  }
};

/// Adiabatic branch followed by eigenvalue continuity over the loop.
struct BranchHistory {
  std::size_t start = 0;
  std::size_t end = 0;  // index of the end eigenvector at theta = 2 pi
  double integrated_width = 0.0;  // int Gamma dt over the loop of duration T
};

/// Branch b (0: lower Re E at theta = 0) followed over `samples` steps.
inline BranchHistory follow_loop_branch(const FlipLoop& loop, std::size_t b, double duration,
                                        std::size_t samples = 20000) {
  if (b > 1) throw DomainError("follow_loop_branch: branch must be 0 or 1");
  auto sorted = [](const Matrix2cd& h) {
    auto e = linalg::eigenvalues_2x2(h);
    if (e[1].real() < e[0].real()) std::swap(e[0], e[1]);
    return e;
  };
  BranchHistory out;
  out.start = b;
  cplx current = sorted(loop.at(0.0))[b];
  double prev_width = -2.0 * current.imag();
  const double dt = duration / static_cast<double>(samples);
  for (std::size_t k = 1; k <= samples; ++k) {
    const double theta = 2.0 * units::kPi * static_cast<double>(k) / static_cast<double>(samples);
    const auto e = linalg::eigenvalues_2x2(loop.at(theta));
    current = std::abs(e[0] - current) <= std::abs(e[1] - current) ? e[0] : e[1];
    const double w = -2.0 * current.imag();
    out.integrated_width += 0.5 * (prev_width + w) * dt;
    prev_width = w;
  }
  const auto end = sorted(loop.at(2.0 * units::kPi));
  out.end = std::abs(end[0] - current) <= std::abs(end[1] - current) ? 0 : 1;
  return out;
}

struct FlipResult {
  std::array<double, 2> branch_share{};  // end populations on the two branches, summing to 1
  double norm = 0.0;                     // |psi(T)|^2
  std::size_t final_branch = 0;          // branch with the larger share
};

/// Exact integration over the loop with duration T, starting on
/// instantaneous branch `start` (0: lower Re E at theta = 0).
inline FlipResult flip_asymmetry_model(const FlipLoop& loop, double duration, std::size_t start,
                                       std::size_t steps = 0) {
  if (start > 1) throw DomainError("flip_asymmetry_model: start branch must be 0 or 1");
  if (!(duration > 0.0)) throw DomainError("flip_asymmetry_model: duration must be > 0");
  auto sorted_vectors = [](const Matrix2cd& h) {
    const auto e = linalg::eigenvalues_2x2(h);
    Matrix2cd v = eigenvectors_2x2(h);
    if (e[1].real() < e[0].real()) v.col(0).swap(v.col(1));
    return v;
  };
  if (steps == 0) steps = std::max<std::size_t>(2000, static_cast<std::size_t>(20.0 * duration));
  TwoLevelState s;
  s.psi = sorted_vectors(loop.at(0.0)).col(static_cast<Eigen::Index>(start));
  const double rate = 2.0 * units::kPi / duration;
  s = magnus4([&](double t) { return loop.at(rate * t); }, s, 0.0, duration, steps);
  // End point is Hermitian (I = 0), so its eigenvectors are orthonormal.
  const Matrix2cd v = sorted_vectors(loop.at(2.0 * units::kPi));
  FlipResult out;
  const double p0 = std::norm(v.col(0).dot(s.psi));
  const double p1 = std::norm(v.col(1).dot(s.psi));
  out.branch_share = {p0 / (p0 + p1), p1 / (p0 + p1)};
  out.norm = s.norm();
  out.final_branch = p1 > p0 ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Lossy two-level pulse: H = [[0, W(t)], [W(t), D - i g/2]],
// W(t) = W0 sin(pi t / T). The ground branch decays only through mixing.

struct LossyPulse {
  double peak_coupling = 0.1;
  double detuning = 1.0;
  double loss = 1.0;
  double duration = 200.0;

  double coupling(double t) const { return peak_coupling * std::sin(units::kPi * t / duration); }

  Matrix2cd at(double t) const {
    Matrix2cd h;
    h << 0.0, coupling(t), coupling(t), cplx(detuning, -0.5 * loss);
    return h;
  }
};

/// 1 - |psi(T)|^2 starting in the lower state.
inline double exact_pdiss(const LossyPulse& p, std::size_t steps = 0) {
  if (steps == 0) steps = std::max<std::size_t>(4000, static_cast<std::size_t>(50.0 * p.duration));
  TwoLevelState s;
  s = magnus4([&](double t) { return p.at(t); }, s, 0.0, p.duration, steps);
  return -std::expm1(std::log(s.psi.squaredNorm()) + 2.0 * s.log_norm);
}

/// Widths of the branch connected to the lower state at `samples` times.
inline std::pair<std::vector<double>, std::vector<double>> lossy_pulse_widths(const LossyPulse& p,
                                                                             std::size_t samples) {
  if (samples < 2) throw DomainError("lossy_pulse_widths: need at least 2 samples");
  std::vector<double> t(samples);
  std::vector<double> g(samples);
  cplx current = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    t[k] = p.duration * static_cast<double>(k) / static_cast<double>(samples - 1);
    const auto e = linalg::eigenvalues_2x2(p.at(t[k]));
    current = std::abs(e[0] - current) <= std::abs(e[1] - current) ? e[0] : e[1];
    g[k] = -2.0 * current.imag();
  }
  return {t, g};
}

/// Adiabatic prediction 1 - exp(-int Gamma dt) on the lower branch.
inline double adiabatic_pdiss(const LossyPulse& p, std::size_t samples = 20001) {
  const auto [t, g] = lossy_pulse_widths(p, samples);
  return adiabatic_pdiss(t, g, 1e-12);
}

}  // namespace epflip
