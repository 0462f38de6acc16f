#pragma once

// Second-order split-operator integrator for the two-channel equation
//   i d/dt (chi1, chi2) = [T + (eps1 + V_abs, -mu E(t); -mu E(t), eps2 + V_abs)] (chi1, chi2).
// One step is exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2) with V sampled at the
// step midpoint. The 2x2 potential block is exponentiated exactly per grid
// point: the CAP is common to both channels, so V = m(R) + N(R) with m a
// scalar and N = (d, -c; -c, -d) real, N^2 = (d^2 + c^2) 1.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "epflip/bound_states.hpp"
#include "epflip/errors.hpp"
#include "epflip/grid.hpp"
#include "epflip/potentials.hpp"

namespace epflip {


/// Heuristic accuracy scale for the step: max of the kinetic range and the
/// spread of the diabatic curves on the grid.
inline double step_energy_scale(const RadialGrid& grid, const PotentialSet& pot) {
  const KineticOperator t(grid, pot.mass);
  const VectorXd e1 = pot.sample_eps1(grid);
  const VectorXd e2 = pot.sample_eps2(grid);
  const double hi = std::max(e1.maxCoeff(), e2.maxCoeff());
  const double lo = std::min(e1.minCoeff(), e2.minCoeff());
  return std::max(t.max_energy(), hi - lo);
}

class SplitOperatorPropagator {
public:
  SplitOperatorPropagator(const RadialGrid& grid, const PotentialSet& pot,
                          const AbsorbingPotential& cap, FieldFunction field, double dt)
      : grid_(grid), kinetic_(grid, pot.mass), field_(std::move(field)), dt_(dt) {
    if (!(std::abs(dt) > 0.0) || !std::isfinite(dt)) {
      throw DomainError("SplitOperatorPropagator: dt must be finite and nonzero");
    }
    const VectorXd e1 = pot.sample_eps1(grid);
    const VectorXd e2 = pot.sample_eps2(grid);
    const VectorXcd vabs = cap.strength > 0.0 ? cap_values(grid, cap) : VectorXcd::Zero(e1.size()).eval();
    mean_ = 0.5 * (e1 + e2).cast<cplx>() + vabs;
    half_gap_ = 0.5 * (e1 - e2);
    dipole_ = pot.sample_dipole(grid);
    build_factors(dt_, kinetic_phase_, mean_phase_);
    work1_.resize(e1.size());
    work2_.resize(e1.size());
  }

  const RadialGrid& grid() const noexcept { return grid_; }
  double dt() const noexcept { return dt_; }
  const FieldFunction& field() const noexcept { return field_; }

  /// Advance by the configured dt.
  void step(ChannelWavepacket& psi) { advance(psi, dt_, kinetic_phase_, mean_phase_); }

  /// Advance by an arbitrary step (used for the shortened final step).
  void step(ChannelWavepacket& psi, double dt) {
    if (dt == dt_) {
      step(psi);
      return;
    }
    VectorXcd kin;
    VectorXcd mean;
    build_factors(dt, kin, mean);
    advance(psi, dt, kin, mean);
  }

private:
  void build_factors(double dt, VectorXcd& kin, VectorXcd& mean) const {
    const double inv_n = 1.0 / static_cast<double>(grid_.size());
    const cplx minus_i(0.0, -1.0);
    kin = (minus_i * dt * kinetic_.symbol().cast<cplx>()).array().exp() * inv_n;
    mean = (minus_i * (0.5 * dt) * mean_).array().exp();
  }

  void apply_potential(ChannelWavepacket& psi, double tau, double efield,
                       const VectorXcd& mean) const {
    const Eigen::Index n = psi.chi1.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = half_gap_[i];
      const double c = dipole_[i] * efield;
      const double s = std::sqrt(d * d + c * c);
      const double cs = std::cos(s * tau);
      const double sn = s > 0.0 ? std::sin(s * tau) / s : tau;
      const cplx a = psi.chi1[i];
      const cplx b = psi.chi2[i];
      const cplx off(0.0, sn * c);
      psi.chi1[i] = mean[i] * (cplx(cs, -sn * d) * a + off * b);
      psi.chi2[i] = mean[i] * (off * a + cplx(cs, sn * d) * b);
    }
  }

  void advance(ChannelWavepacket& psi, double dt, const VectorXcd& kin, const VectorXcd& mean) {
    const auto n = static_cast<std::size_t>(psi.chi1.size());
    if (n != grid_.size() || static_cast<std::size_t>(psi.chi2.size()) != n) {
      throw DomainError("step: wavepacket does not match the grid");
    }
    const double efield = field_ ? field_(psi.time + 0.5 * dt) : 0.0;
    const double tau = 0.5 * dt;
    apply_potential(psi, tau, efield, mean);

    const auto& fft = kinetic_.transform();
    const std::span<cplx> b1(work1_.data(), n);
    const std::span<cplx> b2(work2_.data(), n);
    fft.forward(std::span<const cplx>(psi.chi1.data(), n), b1);
    fft.forward(std::span<const cplx>(psi.chi2.data(), n), b2);
    work1_.array() *= kin.array();
    work2_.array() *= kin.array();
    fft.backward(b1, std::span<cplx>(psi.chi1.data(), n));
    fft.backward(b2, std::span<cplx>(psi.chi2.data(), n));

    apply_potential(psi, tau, efield, mean);
    psi.time += dt;

    // Any NaN is spread over the whole grid by the transforms.
    const Eigen::Index probe = static_cast<Eigen::Index>(n / 2);
    if (!std::isfinite(std::norm(psi.chi1[probe])) || !std::isfinite(std::norm(psi.chi2[probe])) ||
        !std::isfinite(efield)) {
      throw NumericalError("propagation produced a non-finite amplitude at t = " +
                           std::to_string(psi.time) + " (step too large or potential blow-up)");
    }
  }

  RadialGrid grid_;
  KineticOperator kinetic_;
  FieldFunction field_;
  double dt_;
  VectorXcd mean_;
  VectorXd half_gap_;
  VectorXd dipole_;
  VectorXcd kinetic_phase_;
  VectorXcd mean_phase_;
  VectorXcd work1_;
  VectorXcd work2_;
};

/// Samples recorded along a propagation.
template <class Record>
struct PropagationTrace {
  std::vector<double> times;
  std::vector<Record> records;
  ChannelWavepacket final_state;
};

/// Number of steps to reach `duration`, the last one shortened if needed.
inline std::size_t step_count(double duration, double dt) {
  if (!(duration > 0.0) || !(dt > 0.0)) throw DomainError("step_count: duration and dt must be > 0");
  const double ratio = duration / dt;
  auto n = static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12)));
  return n == 0 ? 1 : n;
}

/// Runs from psi.time to psi.time + duration, calling `sample` at the start,
/// every `sample_every` steps and at the exact end time.
template <class Sampler>
auto propagate(SplitOperatorPropagator& prop, ChannelWavepacket psi, double duration,
               std::size_t sample_every, Sampler&& sample)
    -> PropagationTrace<std::invoke_result_t<Sampler&, const ChannelWavepacket&>> {
  using Record = std::invoke_result_t<Sampler&, const ChannelWavepacket&>;
  if (sample_every == 0) throw DomainError("propagate: sample_every must be >= 1");
  const double dt = prop.dt();
  const double t0 = psi.time;
  const double t_end = t0 + duration;
  const std::size_t n = step_count(duration, dt);

  PropagationTrace<Record> trace;
  trace.times.push_back(psi.time);
  trace.records.push_back(sample(std::as_const(psi)));
  for (std::size_t k = 1; k <= n; ++k) {
    if (k < n) {
      prop.step(psi);
      psi.time = t0 + static_cast<double>(k) * dt;
    } else {
      prop.step(psi, t_end - psi.time);
      psi.time = t_end;
    }
    if (k == n || k % sample_every == 0) {
      trace.times.push_back(psi.time);
      trace.records.push_back(sample(std::as_const(psi)));
    }
  }
  trace.final_state = std::move(psi);
  return trace;
}

/// Propagation without sampling; returns the final state.
inline ChannelWavepacket propagate_to(SplitOperatorPropagator& prop, ChannelWavepacket psi,
                                      double duration) {
  auto trace = propagate(prop, std::move(psi), duration, std::numeric_limits<std::size_t>::max(),
                         [](const ChannelWavepacket&) { return 0; });
  return std::move(trace.final_state);
}

}  // namespace epflip
