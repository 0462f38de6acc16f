#pragma once

// Vibrational populations, dissociation probability, surviving fractions
// and the effective eigenenergy <i|H|Psi>/<i|Psi>.

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epflip/bound_states.hpp"
#include "epflip/errors.hpp"
#include "epflip/grid.hpp"
#include "epflip/potentials.hpp"

namespace epflip {

struct Populations {
  std::vector<double> bound;  // P_v, v = 0..n_bound-1
  double dissociated = 0.0;   // 1 - sum P_v

  double bound_total() const noexcept { return 1.0 - dissociated; }
};

/// P_v = |<phi_v|chi1>|^2 on the dR-weighted grid; P_diss = 1 - sum P_v.
inline Populations populations(const ChannelWavepacket& psi, const BoundStateBasis& basis) {
  const auto n = static_cast<Eigen::Index>(basis.grid.size());
  if (psi.chi1.size() != n) throw DomainError("populations: state and basis grids differ");
  const VectorXcd amplitudes = basis.states.transpose().cast<cplx>() * psi.chi1 * basis.grid.spacing();
  Populations out;
  out.bound.resize(static_cast<std::size_t>(amplitudes.size()));
  double total = 0.0;
  for (Eigen::Index v = 0; v < amplitudes.size(); ++v) {
    const double p = std::norm(amplitudes[v]);
    out.bound[static_cast<std::size_t>(v)] = p;
    total += p;
  }
  out.dissociated = 1.0 - total;
  return out;
}

struct SurvivingFractions {
  double initial = 0.0;
  double target = 0.0;
  double other = 0.0;
};

/// Shares of the non-dissociated population in v_i, v_t and all other levels.
inline SurvivingFractions surviving_fractions(std::span<const double> p, std::size_t v_initial,
                                              std::size_t v_target) {
  if (v_initial >= p.size() || v_target >= p.size()) {
    throw DomainError("surviving_fractions: level index out of range");
  }
  double total = 0.0;
  for (const double x : p) total += x;
  if (!(total > 0.0)) {
    throw NumericalError("surviving_fractions: no bound population left, fractions undefined");
  }
  SurvivingFractions f;
  f.initial = p[v_initial] / total;
  f.target = v_target == v_initial ? f.initial : p[v_target] / total;
  f.other = 1.0 - f.initial - (v_target == v_initial ? 0.0 : f.target);
  return f;
}

inline constexpr double kDefaultOverlapFloor = 1e-8;

/// <ref|H psi> / <ref|psi> for precomputed H psi; empty when |<ref|psi>|
/// falls below `floor`.
inline std::optional<cplx> effective_energy(const VectorXcd& ref, const VectorXcd& h_psi,
                                            const VectorXcd& psi,
                                            double floor = kDefaultOverlapFloor,
                                            double weight = 1.0) {
  if (ref.size() != psi.size() || h_psi.size() != psi.size()) {
    throw DomainError("effective_energy: vector sizes differ");
  }
  const cplx overlap = ref.dot(psi) * weight;
  if (!(std::abs(overlap) > floor)) return std::nullopt;
  return ref.dot(h_psi) * weight / overlap;
}

/// Full instantaneous two-channel Hamiltonian on the grid.
class TwoChannelHamiltonian {
public:
  TwoChannelHamiltonian(const RadialGrid& grid, const PotentialSet& pot,
                        const AbsorbingPotential& cap)
      : kinetic_(grid, pot.mass) {
    const VectorXcd vabs = cap.strength > 0.0 ? cap_values(grid, cap)
                                              : VectorXcd::Zero(static_cast<Eigen::Index>(grid.size())).eval();
    diag1_ = pot.sample_eps1(grid).cast<cplx>() + vabs;
    diag2_ = pot.sample_eps2(grid).cast<cplx>() + vabs;
    dipole_ = pot.sample_dipole(grid);
  }

  const RadialGrid& grid() const noexcept { return kinetic_.grid(); }

  /// Bound-channel component (H Psi)_1 = T chi1 + (eps1 + V_abs) chi1 - mu E chi2.
  VectorXcd apply_channel1(const ChannelWavepacket& psi, double efield) const {
    VectorXcd out = kinetic_.apply(psi.chi1);
    out.array() += diag1_.array() * psi.chi1.array() -
                   efield * dipole_.array().cast<cplx>() * psi.chi2.array();
    return out;
  }

  VectorXcd apply_channel2(const ChannelWavepacket& psi, double efield) const {
    VectorXcd out = kinetic_.apply(psi.chi2);
    out.array() += diag2_.array() * psi.chi2.array() -
                   efield * dipole_.array().cast<cplx>() * psi.chi1.array();
    return out;
  }

private:
  KineticOperator kinetic_;
  VectorXcd diag1_;
  VectorXcd diag2_;
  VectorXd dipole_;
};

/// E_eff(t) for the two-channel wavepacket with |i> = (phi_vi, 0).
inline std::optional<cplx> effective_energy(const ChannelWavepacket& psi,
                                            const TwoChannelHamiltonian& h, double efield,
                                            const ChannelWavepacket& initial,
                                            double floor = kDefaultOverlapFloor) {
  const VectorXcd h_psi = h.apply_channel1(psi, efield);
  return effective_energy(initial.chi1, h_psi, psi.chi1, floor, h.grid().spacing());
}

/// One row of a propagation trace.
struct ObservableRecord {
  double time = 0.0;
  Populations populations;
  std::optional<SurvivingFractions> fractions;
  std::optional<cplx> effective_energy;
  double norm = 1.0;
};

/// Builds ObservableRecord snapshots for a fixed run set-up.
class ObservableSampler {
public:
  ObservableSampler(const BoundStateBasis& basis, const TwoChannelHamiltonian& hamiltonian,
                    FieldFunction field, ChannelWavepacket initial, std::size_t v_initial,
                    std::size_t v_target, double overlap_floor = kDefaultOverlapFloor)
      : basis_(&basis), hamiltonian_(&hamiltonian), field_(std::move(field)),
        initial_(std::move(initial)), v_initial_(v_initial), v_target_(v_target),
        floor_(overlap_floor) {}

  ObservableRecord operator()(const ChannelWavepacket& psi) const {
    ObservableRecord r;
    r.time = psi.time;
    r.populations = populations(psi, *basis_);
    r.norm = psi.norm(basis_->grid.spacing());
    double bound = 0.0;
    for (const double p : r.populations.bound) bound += p;
    if (bound > 0.0) r.fractions = surviving_fractions(r.populations.bound, v_initial_, v_target_);
    r.effective_energy = effective_energy(psi, *hamiltonian_, field_(psi.time), initial_, floor_);
    return r;
  }

private:
  const BoundStateBasis* basis_;
  const TwoChannelHamiltonian* hamiltonian_;
  FieldFunction field_;
  ChannelWavepacket initial_;
  std::size_t v_initial_;
  std::size_t v_target_;
  double floor_;
};

}  // namespace epflip
