#pragma once

// Non-Hermitian Floquet analysis of the two-channel model.
//
// The Floquet matrix is written in photon blocks (c, k): channel c dressed
// with k photons, diagonal H_c - k omega, coupled by -mu E0 / 2 between
// (1, k) and (2, k +- 1). Starting from channel 1 with k = 0 only the
// sector {(1, even k), (2, odd k)} is reachable, so only that sector is built.
//
// Each block keeps the field-free real eigenstates of T + eps_c whose energy
// lies near the block's energy window, with the CAP projected onto them.
// Every other state enters through a second-order (Loewdin) correction
// between neighbouring blocks, evaluated at the band centre. The basis is
// orthonormal and the correction Hermitian, so the anti-Hermitian part of
// the Floquet matrix is -i times a positive semidefinite CAP block and every
// quasienergy has Im E <= 0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epflip/bound_states.hpp"
#include "epflip/errors.hpp"
#include "epflip/grid.hpp"
#include "epflip/linalg.hpp"
#include "epflip/potentials.hpp"
#include "epflip/pulse.hpp"
#include "epflip/units.hpp"

namespace epflip {

using Eigen::MatrixXcd;

struct FloquetSettings {
  int n_photon = 6;
  double window = 0.05;              // a.u., half-width kept around the band per block
  double margin = 0.0;               // a.u., extra states kept beyond the window
  bool effective_frequency = true;   // contour spectra use omega_eff, else omega
  double tie_tolerance = 0.05;       // overlap difference below which a match is ambiguous
  double min_overlap = 0.9;          // below this a tracking step is subdivided
  bool loewdin = true;               // second-order correction for states outside the window
};

/// Field-free channel data in the real eigenbasis of T + eps_c.
struct ChannelSpectra {
  VectorXd energies1;
  VectorXd energies2;
  MatrixXd absorb1;  // <phi|A x^16|phi>; the CAP is -i times this
  MatrixXd absorb2;
  MatrixXd dipole;   // <phi1|mu|phi2>
};

/// One photon block: kept real states and the CAP-shifted block Hamiltonian.
struct FloquetBlock {
  int channel = 1;
  int photons = 0;
  std::vector<Eigen::Index> segment;  // kept real states
  std::vector<Eigen::Index> outside;  // real states left to the correction
  MatrixXcd hamiltonian;              // diag(E) - i W on the segment
  Eigen::Index offset = 0;

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(segment.size()); }
};

class FloquetModel {
public:
  /// Truncation keeps, in block (c, k), real states with E - k omega within
  /// `window` + `margin` of [band_lo, band_hi] for some omega in
  /// [omega_lo, omega_hi].
  FloquetModel(ChannelSpectra channels, FloquetSettings settings, double band_lo, double band_hi,
               double omega_lo, double omega_hi)
      : ch_(std::move(channels)), settings_(settings), band_lo_(band_lo), band_hi_(band_hi),
        omega_lo_(omega_lo), omega_hi_(omega_hi) {
    if (settings_.n_photon < 1) throw DomainError("FloquetModel: n_photon must be >= 1");
    if (!(omega_lo > 0.0) || omega_hi < omega_lo) {
      throw DomainError("FloquetModel: photon energy range must be positive and ordered");
    }
    if (!(band_hi >= band_lo)) throw DomainError("FloquetModel: band must be ordered");
    const auto n1 = ch_.energies1.size();
    const auto n2 = ch_.energies2.size();
    if (ch_.absorb1.rows() != n1 || ch_.absorb1.cols() != n1 || ch_.absorb2.rows() != n2 ||
        ch_.absorb2.cols() != n2 || ch_.dipole.rows() != n1 || ch_.dipole.cols() != n2) {
      throw DomainError("FloquetModel: inconsistent channel matrix sizes");
    }
    build_blocks();
    build_couplings();
  }

  const FloquetSettings& settings() const noexcept { return settings_; }
  const ChannelSpectra& channels() const noexcept { return ch_; }
  Eigen::Index dimension() const noexcept { return dimension_; }
  const std::vector<FloquetBlock>& blocks() const noexcept { return blocks_; }
  double omega_lo() const noexcept { return omega_lo_; }
  double omega_hi() const noexcept { return omega_hi_; }
  double band_centre() const noexcept { return 0.5 * (band_lo_ + band_hi_); }

  /// Same channels with another photon order.
  FloquetModel with_photons(int n_photon) const {
    FloquetSettings s = settings_;
    s.n_photon = n_photon;
    return FloquetModel(ch_, s, band_lo_, band_hi_, omega_lo_, omega_hi_);
  }

  /// Position in the Floquet vector of the block-(1, 0) state that carries
  /// field-free level j, if that level is inside the band window.
  std::optional<Eigen::Index> reference_index(Eigen::Index j) const {
    const FloquetBlock& b = blocks_[zero_block_];
    const auto it = std::find(b.segment.begin(), b.segment.end(), j);
    if (it == b.segment.end()) return std::nullopt;
    return b.offset + static_cast<Eigen::Index>(it - b.segment.begin());
  }

  /// Unit vector on field-free level j in block (1, 0).
  VectorXcd reference_vector(Eigen::Index j) const {
    const auto pos = reference_index(j);
    if (!pos) throw DomainError("FloquetModel: level " + std::to_string(j) + " not in the band window");
    VectorXcd e = VectorXcd::Zero(dimension_);
    e[*pos] = 1.0;
    return e;
  }

  /// Zero-field quasienergy of level j to first order in the CAP.
  cplx reference_energy(Eigen::Index j) const {
    const auto pos = reference_index(j);
    if (!pos) throw DomainError("FloquetModel: level " + std::to_string(j) + " not in the band window");
    const FloquetBlock& b = blocks_[zero_block_];
    return b.hamiltonian(*pos - b.offset, *pos - b.offset);
  }

  /// Share of |x|^2 on field-free level j in block (1, 0).
  double reference_weight(const VectorXcd& x, Eigen::Index j) const {
    const auto pos = reference_index(j);
    if (!pos) return 0.0;
    return std::norm(x[*pos]) / x.squaredNorm();
  }

  /// Truncated Floquet matrix at peak field e0 and photon energy omega.
  MatrixXcd matrix(double e0, double omega) const {
    if (!(omega > 0.0)) throw DomainError("FloquetModel: omega must be > 0");
    MatrixXcd f = MatrixXcd::Zero(dimension_, dimension_);
    for (const FloquetBlock& b : blocks_) {
      auto d = f.block(b.offset, b.offset, b.size(), b.size());
      d = b.hamiltonian;
      d.diagonal().array() -= static_cast<double>(b.photons) * omega;
    }
    const double c = -0.5 * e0;
    if (c == 0.0) return f;
    for (std::size_t a = 0; a + 1 < blocks_.size(); ++a) {
      const MatrixXd& k = links_[a];
      if (k.size() == 0) continue;
      const FloquetBlock& x = blocks_[a];
      const FloquetBlock& y = blocks_[a + 1];
      f.block(x.offset, y.offset, x.size(), y.size()) = (c * k).cast<cplx>();
      f.block(y.offset, x.offset, y.size(), x.size()) = (c * k.transpose()).cast<cplx>();
    }
    if (settings_.loewdin) add_dropped_states(f, c, omega);
    return f;
  }

private:
  void build_blocks() {
    const int n = settings_.n_photon;
    dimension_ = 0;
    for (int k = -n; k <= n; ++k) {
      FloquetBlock b;
      b.channel = (k % 2 == 0) ? 1 : 2;
      b.photons = k;
      const VectorXd& e = b.channel == 1 ? ch_.energies1 : ch_.energies2;
      const MatrixXd& w = b.channel == 1 ? ch_.absorb1 : ch_.absorb2;
      // Channel energies E with E - k omega inside band +- window.
      const double a1 = band_lo_ - settings_.window + k * omega_lo_;
      const double a2 = band_lo_ - settings_.window + k * omega_hi_;
      const double b1 = band_hi_ + settings_.window + k * omega_lo_;
      const double b2 = band_hi_ + settings_.window + k * omega_hi_;
      const double lo = std::min(a1, a2);
      const double hi = std::max(b1, b2);
      for (Eigen::Index j = 0; j < e.size(); ++j) {
        if (e[j] >= lo - settings_.margin && e[j] <= hi + settings_.margin) {
          b.segment.push_back(j);
        } else {
          b.outside.push_back(j);
        }
      }
      const auto ns = b.size();
      b.hamiltonian.resize(ns, ns);
      for (Eigen::Index c = 0; c < ns; ++c) {
        for (Eigen::Index r = 0; r < ns; ++r) b.hamiltonian(r, c) = cplx(0.0, -w(b.segment[r], b.segment[c]));
        b.hamiltonian(c, c) += e[b.segment[c]];
      }
      b.offset = dimension_;
      dimension_ += b.size();
      if (k == 0) zero_block_ = blocks_.size();
      blocks_.push_back(std::move(b));
    }
    if (blocks_[zero_block_].size() == 0) {
      throw DomainError("FloquetModel: no channel-1 state inside the band");
    }
  }

  /// Dipole rows of block x's states against all real states of the other
  /// channel.
  MatrixXd against_channel(const FloquetBlock& x) const {
    const Eigen::Index other = x.channel == 1 ? ch_.dipole.cols() : ch_.dipole.rows();
    MatrixXd rows(x.size(), other);
    for (Eigen::Index r = 0; r < x.size(); ++r) {
      if (x.channel == 1) {
        rows.row(r) = ch_.dipole.row(x.segment[static_cast<std::size_t>(r)]);
      } else {
        rows.row(r) = ch_.dipole.col(x.segment[static_cast<std::size_t>(r)]).transpose();
      }
    }
    return rows;
  }

  static MatrixXd columns(const MatrixXd& m, const std::vector<Eigen::Index>& cols) {
    MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = m.col(cols[c]);
    return out;
  }

  void build_couplings() {
    links_.assign(blocks_.size() > 0 ? blocks_.size() - 1 : 0, MatrixXd());
    std::vector<MatrixXd> against(blocks_.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      if (blocks_[i].size() > 0) against[i] = against_channel(blocks_[i]);
    }
    for (std::size_t a = 0; a + 1 < blocks_.size(); ++a) {
      const FloquetBlock& y = blocks_[a + 1];
      if (blocks_[a].size() == 0 || y.size() == 0) continue;
      links_[a] = columns(against[a], y.segment);
    }
    // Couplings of neighbour states to the states left outside each block.
    loewdin_.assign(blocks_.size(), {});
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const FloquetBlock& blk = blocks_[b];
      if (blk.outside.empty()) continue;
      for (const int side : {-1, 1}) {
        const auto nb = static_cast<std::ptrdiff_t>(b) + side;
        if (nb < 0 || nb >= static_cast<std::ptrdiff_t>(blocks_.size())) continue;
        const auto n = static_cast<std::size_t>(nb);
        if (blocks_[n].size() == 0) continue;
        loewdin_[b].push_back({n, columns(against[n], blk.outside)});
      }
    }
  }

  void add_dropped_states(MatrixXcd& f, double c, double omega) const {
    const double centre = band_centre();
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const FloquetBlock& blk = blocks_[b];
      const auto& nbs = loewdin_[b];
      if (nbs.empty()) continue;
      const VectorXd& e = blk.channel == 1 ? ch_.energies1 : ch_.energies2;
      const auto nq = static_cast<Eigen::Index>(blk.outside.size());
      VectorXd g(nq);
      const double shift = static_cast<double>(blk.photons) * omega;
      for (Eigen::Index q = 0; q < nq; ++q) {
        g[q] = c * c / (centre - (e[blk.outside[static_cast<std::size_t>(q)]] - shift));
      }
      for (const auto& [x, vx] : nbs) {
        const MatrixXd left = vx * g.asDiagonal();
        for (const auto& [y, vy] : nbs) {
          const FloquetBlock& bx = blocks_[x];
          const FloquetBlock& by = blocks_[y];
          f.block(bx.offset, by.offset, bx.size(), by.size()) += (left * vy.transpose()).cast<cplx>();
        }
      }
    }
  }

  ChannelSpectra ch_;
  FloquetSettings settings_;
  double band_lo_;
  double band_hi_;
  double omega_lo_;
  double omega_hi_;
  std::vector<FloquetBlock> blocks_;
  std::vector<MatrixXd> links_;  // segment(a) x segment(a+1), without -E0/2
  std::vector<std::vector<std::pair<std::size_t, MatrixXd>>> loewdin_;
  std::size_t zero_block_ = 0;
  Eigen::Index dimension_ = 0;
};

/// Full field-free channel spectra, projected CAP and dipole on a grid.
inline ChannelSpectra channel_spectra(const RadialGrid& grid, const PotentialSet& pot,
                                      const AbsorbingPotential& cap) {
  const MatrixXd t = KineticOperator(grid, pot.mass).matrix();
  ChannelSpectra out;
  MatrixXd s1;
  MatrixXd s2;
  {
    MatrixXd h = t;
    h.diagonal() += pot.sample_eps1(grid);
    auto e = linalg::symmetric_eigen(std::move(h));
    out.energies1 = std::move(e.values);
    s1 = std::move(e.vectors);
  }
  {
    MatrixXd h = t;
    h.diagonal() += pot.sample_eps2(grid);
    auto e = linalg::symmetric_eigen(std::move(h));
    out.energies2 = std::move(e.values);
    s2 = std::move(e.vectors);
  }
  for (Eigen::Index v = 0; v < s1.cols(); ++v) detail::fix_phase(s1.col(v));
  for (Eigen::Index v = 0; v < s2.cols(); ++v) detail::fix_phase(s2.col(v));
  // Unit Euclidean eigenvectors: grid integrals sum f g dR become plain dot
  // products of (sqrt(dR) f) and (sqrt(dR) g), so dR drops out.
  VectorXd absorb = VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  if (cap.strength > 0.0) absorb = -cap_values(grid, cap).imag();
  const VectorXd mu = pot.sample_dipole(grid);
  out.absorb1 = s1.transpose() * absorb.asDiagonal() * s1;
  out.absorb2 = s2.transpose() * absorb.asDiagonal() * s2;
  out.dipole = s1.transpose() * mu.asDiagonal() * s2;
  return out;
}

/// Floquet model of the grid Hamiltonian for a band of channel-1 energies and
/// a photon-energy range.
inline FloquetModel build_floquet_model(const RadialGrid& grid, const PotentialSet& pot,
                                        const AbsorbingPotential& cap,
                                        const FloquetSettings& settings, double band_lo,
                                        double band_hi, double omega_lo, double omega_hi) {
  return FloquetModel(channel_spectra(grid, pot, cap), settings, band_lo, band_hi, omega_lo,
                      omega_hi);
}

/// Re E folded into (ref - omega/2, ref + omega/2].
inline cplx fold_to_zone(cplx e, double omega, double ref) {
  double x = e.real() - ref;
  x -= omega * std::ceil(x / omega - 0.5);
  return {ref + x, e.imag()};
}

/// Complex quasienergies at one (I, lambda) point.
struct QuasienergySpectrum {
  double intensity = 0.0;   // W/cm^2
  double wavelength = 0.0;  // nm
  double omega = 0.0;
  VectorXcd values;
  MatrixXcd vectors;
  std::vector<std::optional<std::size_t>> labels;  // field-free level v per eigenvalue
};

/// Best eigenpair match of a previous (value, vector) in `f`.
struct BranchMatch {
  cplx value;
  VectorXcd vector;
  double overlap = 0.0;
  bool ambiguous = false;
};

inline BranchMatch match_branch(const MatrixXcd& f, cplx guess, const VectorXcd& previous,
                                const FloquetSettings& settings, Eigen::Index candidates = 3) {
  MatrixXcd start(previous.size(), 1);
  start.col(0) = previous;
  const auto near = linalg::nearby_eigen(f, guess, candidates, start);
  const double pn = previous.norm();
  double best = -1.0;
  double second = -1.0;
  Eigen::Index pick = 0;
  for (Eigen::Index j = 0; j < near.values.size(); ++j) {
    const double o = std::abs(previous.dot(near.vectors.col(j))) / pn;
    if (o > best) {
      second = best;
      best = o;
      pick = j;
    } else if (o > second) {
      second = o;
    }
  }
  BranchMatch m;
  m.value = near.values[pick];
  m.vector = near.vectors.col(pick);
  m.overlap = best;
  m.ambiguous = second >= 0.0 && best - second < settings.tie_tolerance;
  return m;
}

/// Follows the eigenpair from (e0_from, omega_from) to (e0_to, omega_to)
/// along a straight segment, subdividing when the overlap drops.
inline BranchMatch follow_segment(const FloquetModel& model, BranchMatch state, double e0_from,
                                  double omega_from, double e0_to, double omega_to,
                                  int depth = 0) {
  const MatrixXcd f = model.matrix(e0_to, omega_to);
  BranchMatch next = match_branch(f, state.value, state.vector, model.settings());
  if (next.overlap >= model.settings().min_overlap || depth >= 10) {
    next.ambiguous = next.ambiguous || state.ambiguous;
    return next;
  }
  const double e0_mid = 0.5 * (e0_from + e0_to);
  const double omega_mid = 0.5 * (omega_from + omega_to);
  BranchMatch mid = follow_segment(model, state, e0_from, omega_from, e0_mid, omega_mid, depth + 1);
  return follow_segment(model, mid, e0_mid, omega_mid, e0_to, omega_to, depth + 1);
}

/// Field-free start of the branch of channel-1 level v.
inline BranchMatch field_free_branch(const FloquetModel& model, std::size_t v) {
  const auto j = static_cast<Eigen::Index>(v);
  BranchMatch m;
  m.vector = model.reference_vector(j);
  m.value = model.reference_energy(j);
  m.overlap = 1.0;
  return m;
}

/// Branch of level v continued from zero field to (e0, omega) in `steps`
/// equal field-amplitude steps.
inline BranchMatch continue_branch(const FloquetModel& model, std::size_t v, double e0, double omega,
                                   std::size_t steps = 16) {
  BranchMatch m = field_free_branch(model, v);
  // At zero field the exact eigenpair of the (possibly CAP-mixed) block.
  m = match_branch(model.matrix(0.0, omega), m.value, m.vector, model.settings());
  double prev = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double next = e0 * static_cast<double>(s) / static_cast<double>(steps);
    m = follow_segment(model, m, prev, omega, next, omega);
    prev = next;
  }
  return m;
}

/// Full spectrum at (I, lambda), with labels for the levels in `label_levels`
/// assigned by continuation from zero field.
inline QuasienergySpectrum quasienergies(const FloquetModel& model, double intensity,
                                         double wavelength,
                                         std::span<const std::size_t> label_levels = {},
                                         std::optional<double> omega_override = std::nullopt) {
  QuasienergySpectrum out;
  out.intensity = intensity;
  out.wavelength = wavelength;
  out.omega = omega_override ? *omega_override : units::wavelength_to_omega(wavelength);
  const double e0 = units::intensity_to_field(intensity);
  auto eig = linalg::general_eigen(model.matrix(e0, out.omega));
  out.values = std::move(eig.values);
  out.vectors = std::move(eig.vectors);
  out.labels.assign(static_cast<std::size_t>(out.values.size()), std::nullopt);
  for (const std::size_t v : label_levels) {
    const BranchMatch m = continue_branch(model, v, e0, out.omega);
    Eigen::Index best = 0;
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < out.values.size(); ++j) {
      const double dj = std::abs(out.values[j] - m.value);
      if (dj < d) {
        d = dj;
        best = j;
      }
    }
    out.labels[static_cast<std::size_t>(best)] = v;
  }
  return out;
}

/// Largest change of the labelled quasienergies when n_photon -> n_photon + 1.
inline double photon_convergence(const FloquetModel& model, std::span<const std::size_t> levels,
                                 double intensity, double omega) {
  const FloquetModel bigger = model.with_photons(model.settings().n_photon + 1);
  const double e0 = units::intensity_to_field(intensity);
  double worst = 0.0;
  for (const std::size_t v : levels) {
    const cplx a = continue_branch(model, v, e0, omega).value;
    const cplx b = continue_branch(bigger, v, e0, omega).value;
    worst = std::max(worst, std::abs(a - b));
  }
  return worst;
}

/// Quasienergy history of one branch along a contour.
struct BranchTrack {
  std::size_t level = 0;
  std::vector<double> times;
  std::vector<cplx> energies;
  std::vector<double> widths;  // Gamma = -2 Im E
  std::vector<bool> ambiguous;
  std::vector<double> omegas;
  std::optional<std::size_t> final_level;  // dominant field-free level at the end

  std::size_t ambiguous_count() const {
    return static_cast<std::size_t>(std::count(ambiguous.begin(), ambiguous.end(), true));
  }
};

/// Photon energy seen by the Floquet operator at time t.
inline double floquet_omega(const PulseContour& c, double t, bool effective) {
  return effective ? c.omega_eff(t) : c.omega(t);
}

/// Range of the Floquet photon energy over a contour (dense sampling).
inline std::pair<double, double> floquet_omega_range(const PulseContour& c, bool effective,
                                                     std::size_t samples = 2001) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t j = 0; j < samples; ++j) {
    const double t = c.duration() * static_cast<double>(j) / static_cast<double>(samples - 1);
    const double w = floquet_omega(c, t, effective);
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  if (!(lo > 0.0)) throw DomainError("contour photon energy reaches zero");
  return {lo, hi};
}

/// Adiabatic following of level v along the contour, sampled at `samples`
/// equally spaced times.
inline BranchTrack track_branch(const FloquetModel& model, const PulseContour& contour,
                                std::size_t level, std::size_t samples,
                                std::span<const std::size_t> candidate_levels = {}) {
  if (samples < 100) throw DomainError("track_branch: need at least 100 samples");
  const bool effective = model.settings().effective_frequency;
  BranchTrack out;
  out.level = level;
  BranchMatch m = field_free_branch(model, level);
  double e0_prev = 0.0;
  double omega_prev = floquet_omega(contour, 0.0, effective);
  m = match_branch(model.matrix(0.0, omega_prev), m.value, m.vector, model.settings());
  for (std::size_t j = 0; j < samples; ++j) {
    const double t = j + 1 == samples
                         ? contour.duration()
                         : contour.duration() * static_cast<double>(j) / static_cast<double>(samples - 1);
    const double e0 = contour.envelope(t);
    const double omega = floquet_omega(contour, t, effective);
    if (j > 0) m = follow_segment(model, m, e0_prev, omega_prev, e0, omega);
    out.times.push_back(t);
    out.energies.push_back(m.value);
    out.widths.push_back(-2.0 * m.value.imag());
    out.ambiguous.push_back(m.ambiguous);
    out.omegas.push_back(omega);
    e0_prev = e0;
    omega_prev = omega;
  }
  double best = 0.0;
  auto consider = [&](std::size_t v) {
    const double w = model.reference_weight(m.vector, static_cast<Eigen::Index>(v));
    if (w > best) {
      best = w;
      out.final_level = v;
    }
  };
  if (candidate_levels.empty()) {
    for (Eigen::Index v = 0; v < model.channels().energies1.size(); ++v) {
      if (model.channels().energies1[v] >= 0.0 && v > 0 && !model.reference_index(v)) break;
      consider(static_cast<std::size_t>(v));
    }
  } else {
    for (const std::size_t v : candidate_levels) consider(v);
  }
  return out;
}

/// P_diss = 1 - exp(-int Gamma dt), trapezoid rule over the samples.
/// Widths below -tolerance are rejected; smaller negative values (solver
/// noise) count as zero.
inline double adiabatic_pdiss(std::span<const double> times, std::span<const double> widths,
                              double tolerance = 1e-12) {
  if (times.size() != widths.size() || times.size() < 2) {
    throw DomainError("adiabatic_pdiss: need matching time and width samples (at least 2)");
  }
  double integral = 0.0;
  for (std::size_t j = 0; j < widths.size(); ++j) {
    if (!(widths[j] >= -tolerance)) {
      throw DomainError("adiabatic_pdiss: negative width " + std::to_string(widths[j]) +
                        " at t = " + std::to_string(times[j]));
    }
    if (j > 0) {
      if (!(times[j] > times[j - 1])) throw DomainError("adiabatic_pdiss: times must increase");
      const double a = std::max(widths[j - 1], 0.0);
      const double b = std::max(widths[j], 0.0);
      integral += 0.5 * (a + b) * (times[j] - times[j - 1]);
    }
  }
  return -std::expm1(-integral);
}

/// Constant-width convenience: samples Gamma over [0, T].
inline double adiabatic_pdiss_constant(double width, double duration) {
  const std::vector<double> t{0.0, duration};
  const std::vector<double> g{width, width};
  return adiabatic_pdiss(t, g);
}

/// The two eigenvalues that carry most weight on levels v_a and v_b in
/// block (1, 0), searched near `shift`.
struct LevelPair {
  cplx a;
  cplx b;
  double separation() const { return std::abs(a - b); }
};

inline LevelPair level_pair(const FloquetModel& model, double e0, double omega, std::size_t v_a,
                            std::size_t v_b, cplx shift, Eigen::Index candidates = 4) {
  const auto near = linalg::nearby_eigen(model.matrix(e0, omega), shift, candidates);
  const auto ja = static_cast<Eigen::Index>(v_a);
  const auto jb = static_cast<Eigen::Index>(v_b);
  std::vector<std::pair<double, Eigen::Index>> score;
  for (Eigen::Index j = 0; j < near.values.size(); ++j) {
    const VectorXcd x = near.vectors.col(j);
    score.emplace_back(model.reference_weight(x, ja) + model.reference_weight(x, jb), j);
  }
  std::sort(score.begin(), score.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  if (score.size() < 2) throw NumericalError("level_pair: fewer than two candidates");
  cplx first = near.values[score[0].second];
  cplx second = near.values[score[1].second];
  // Order by weight on v_a for a stable report.
  const double wa0 = model.reference_weight(near.vectors.col(score[0].second), ja);
  const double wa1 = model.reference_weight(near.vectors.col(score[1].second), ja);
  if (wa1 > wa0) std::swap(first, second);
  return {first, second};
}

/// Writes a spectrum as CSV: index, Re E, Im E, folded Re E, label.
inline void write_spectrum_csv(const QuasienergySpectrum& s, const std::string& path,
                               double zone_reference, const std::string& header = {}) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path, "cannot open for writing");
  out << header;
  out << "index,re_e,im_e,re_e_folded,width,label\n" << std::setprecision(17);
  for (Eigen::Index j = 0; j < s.values.size(); ++j) {
    const cplx f = fold_to_zone(s.values[j], s.omega, zone_reference);
    out << j << ',' << s.values[j].real() << ',' << s.values[j].imag() << ',' << f.real() << ','
        << -2.0 * s.values[j].imag() << ',';
    if (const auto& l = s.labels[static_cast<std::size_t>(j)]) out << *l;
    out << '\n';
  }
}

}  // namespace epflip
