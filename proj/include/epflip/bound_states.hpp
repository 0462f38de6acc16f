#pragma once

// Field-free vibrational states of the bound channel (Fourier grid
// Hamiltonian: dense eigensolve of T + eps1 on the grid).

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <string>

#include "epflip/errors.hpp"
#include "epflip/grid.hpp"
#include "epflip/linalg.hpp"
#include "epflip/potentials.hpp"

namespace epflip {

/// Real grid eigenvectors phi_v (sum phi^2 dR = 1) below the eps1 asymptote.
struct BoundStateBasis {
  RadialGrid grid;
  VectorXd energies;  // ascending
  MatrixXd states;    // column v is phi_v
  double asymptote = 0.0;

  std::size_t count() const noexcept { return static_cast<std::size_t>(energies.size()); }
  auto state(std::size_t v) const { return states.col(static_cast<Eigen::Index>(v)); }
};

/// The two channel amplitudes chi1, chi2 at time t.
struct ChannelWavepacket {
  VectorXcd chi1;
  VectorXcd chi2;
  double time = 0.0;

  /// (|chi1|^2 + |chi2|^2) dR summed over the grid.
  double norm(double dr) const { return (chi1.squaredNorm() + chi2.squaredNorm()) * dr; }
};

namespace detail {

// Phase convention: the first lobe that rises above `floor` of the peak is
// positive.
inline void fix_phase(Eigen::Ref<VectorXd> v) {
  const double floor = 1e-3 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > floor) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace detail

/// Sign changes of a real grid function, ignoring samples below
/// `relative_floor` of the peak (exponential tails carry rounding noise).
inline std::size_t count_nodes(const VectorXd& f, double relative_floor = 1e-3) {
  const double floor = relative_floor * f.cwiseAbs().maxCoeff();
  std::size_t nodes = 0;
  int last_sign = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (std::abs(f[i]) <= floor) continue;
    const int s = f[i] > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++nodes;
    last_sign = s;
  }
  return nodes;
}

/// Grid Hamiltonian T + eps1 as a dense real symmetric matrix.
inline MatrixXd bound_channel_matrix(const RadialGrid& grid, const PotentialSet& pot) {
  MatrixXd h = KineticOperator(grid, pot.mass).matrix();
  h.diagonal() += pot.sample_eps1(grid);
  return h;
}

inline BoundStateBasis solve_bound(const RadialGrid& grid, const PotentialSet& pot) {
  auto eig = linalg::symmetric_eigen_below(bound_channel_matrix(grid, pot), pot.asymptote1);
  if (eig.values.size() == 0) {
    throw NumericalError("solve_bound: no bound states below the eps1 asymptote (check potential and grid)");
  }
  BoundStateBasis basis{grid, eig.values, std::move(eig.vectors), pot.asymptote1};
  basis.states /= std::sqrt(grid.spacing());
  for (Eigen::Index v = 0; v < basis.states.cols(); ++v) detail::fix_phase(basis.states.col(v));
  return basis;
}

/// chi1 = phi_v, chi2 = 0 at t = 0.
inline ChannelWavepacket initial_state(const BoundStateBasis& basis, std::size_t v) {
  if (v >= basis.count()) {
    throw DomainError("initial_state: v = " + std::to_string(v) + " but only " +
                      std::to_string(basis.count()) + " bound states");
  }
  ChannelWavepacket psi;
  psi.chi1 = basis.state(v).cast<cplx>();
  psi.chi2 = VectorXcd::Zero(psi.chi1.size());
  psi.time = 0.0;
  return psi;
}

inline void write_bound_energies_csv(const BoundStateBasis& basis, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path, "cannot open for writing");
  out << "v,energy\n" << std::setprecision(17);
  for (std::size_t v = 0; v < basis.count(); ++v) {
    out << v << ',' << basis.energies[static_cast<Eigen::Index>(v)] << '\n';
  }
}

}  // namespace epflip
