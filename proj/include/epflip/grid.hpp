#pragma once

// Uniform radial grid, Fourier kinetic-energy operator and the polynomial
// complex absorbing potential (CAP).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "epflip/errors.hpp"
#include "epflip/fft.hpp"
#include "epflip/units.hpp"

namespace epflip {

using cplx = std::complex<double>;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Electric field E(t) in a.u.
using FieldFunction = std::function<double(double)>;

/// R_i = r_min + i*dR, i = 0..n-1, with R_{n-1} = r_max. The Fourier
/// operator treats the grid as periodic with period n*dR.
class RadialGrid {
public:
  RadialGrid(double r_min, double r_max, std::size_t n)
      : r_min_(r_min), r_max_(r_max), n_(n) {
    if (n < 4) throw DomainError("RadialGrid: need at least 4 points");
    if (!(r_max > r_min)) throw DomainError("RadialGrid: r_max must exceed r_min");
    dr_ = (r_max - r_min) / static_cast<double>(n - 1);
  }

  double r_min() const noexcept { return r_min_; }
  double r_max() const noexcept { return r_max_; }
  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return dr_; }

  double point(std::size_t i) const noexcept {
    return i + 1 == n_ ? r_max_ : r_min_ + static_cast<double>(i) * dr_;
  }

  VectorXd points() const {
    VectorXd r(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) r[static_cast<Eigen::Index>(i)] = point(i);
    return r;
  }

  /// Angular wavenumbers in DFT order: 0, dk, ..., (n/2-1)dk, -(n/2)dk, ..., -dk.
  VectorXd wavenumbers() const {
    const auto n = static_cast<Eigen::Index>(n_);
    const double dk = 2.0 * units::kPi / (static_cast<double>(n_) * dr_);
    VectorXd k(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index m = j < (n + 1) / 2 ? j : j - n;
      k[j] = static_cast<double>(m) * dk;
    }
    return k;
  }

  /// Largest |k| on the grid, pi/dR for even n.
  double max_wavenumber() const noexcept { return units::kPi / dr_; }

  bool same_as(const RadialGrid& other) const noexcept {
    return n_ == other.n_ && r_min_ == other.r_min_ && r_max_ == other.r_max_;
  }

  /// Grid inner product sum conj(a_i) b_i dR.
  template <class A, class B>
  cplx inner(const A& a, const B& b) const {
    return a.dot(b) * dr_;
  }

private:
  double r_min_;
  double r_max_;
  std::size_t n_;
  double dr_;
};

/// V_abs(R) = -i A ((R - R_start)/(R_max - R_start))^16 for R > R_start.
struct AbsorbingPotential {
  double strength = 0.0;
  double r_start = 0.0;

  static constexpr int kExponent = 16;

  /// Magnitude A x^16 on one point (the CAP is -i times this).
  double magnitude(double r, double r_max) const noexcept {
    if (r <= r_start || strength == 0.0) return 0.0;
    const double x = (r - r_start) / (r_max - r_start);
    const double x2 = x * x;
    const double x4 = x2 * x2;
    const double x8 = x4 * x4;
    return strength * x8 * x8;
  }
};

/// Complex CAP samples on the grid: purely negative-imaginary.
inline VectorXcd cap_values(const RadialGrid& grid, const AbsorbingPotential& cap) {
  if (!(cap.r_start >= grid.r_min() && cap.r_start < grid.r_max())) {
    throw DomainError("cap_values: r_start outside [r_min, r_max)");
  }
  if (!(cap.strength >= 0.0)) throw DomainError("cap_values: strength must be >= 0");
  VectorXcd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = cplx(0.0, -cap.magnitude(grid.point(i), grid.r_max()));
  }
  return v;
}

/// Spectral kinetic operator -1/(2m) d^2/dR^2 on a periodic uniform grid.
class KineticOperator {
public:
  KineticOperator(const RadialGrid& grid, double mass)
      : grid_(grid), mass_(mass), fft_(std::make_shared<FourierTransform>(grid.size())) {
    if (!(mass > 0.0)) throw DomainError("KineticOperator: mass must be > 0");
    const VectorXd k = grid.wavenumbers();
    symbol_ = k.array().square() / (2.0 * mass);
  }

  const RadialGrid& grid() const noexcept { return grid_; }
  double mass() const noexcept { return mass_; }
  const FourierTransform& transform() const noexcept { return *fft_; }

  /// k^2/(2m) in DFT order.
  const VectorXd& symbol() const noexcept { return symbol_; }
  double max_energy() const noexcept { return symbol_.maxCoeff(); }

  VectorXcd apply(const VectorXcd& psi) const {
    if (static_cast<std::size_t>(psi.size()) != grid_.size()) {
      throw DomainError("apply_kinetic: vector length does not match grid");
    }
    VectorXcd work(psi.size());
    const std::span<cplx> buf(work.data(), static_cast<std::size_t>(work.size()));
    fft_->forward(std::span<const cplx>(psi.data(), buf.size()), buf);
    const double inv_n = 1.0 / static_cast<double>(grid_.size());
    work.array() *= symbol_.array() * inv_n;
    fft_->backward(buf, buf);
    return work;
  }

  /// Dense real-symmetric matrix of the same operator. It is circulant:
  /// T_ij = t((i-j) mod n) with t the inverse DFT of the symbol.
  MatrixXd matrix() const {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    VectorXcd kernel = symbol_.cast<cplx>();
    const std::span<cplx> buf(kernel.data(), static_cast<std::size_t>(n));
    fft_->backward(buf, buf);
    kernel /= static_cast<double>(n);
    MatrixXd t(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index d = ((i - j) % n + n) % n;
        t(i, j) = kernel[d].real();
      }
    }
    // Exact symmetry; the kernel is even up to rounding.
    return 0.5 * (t + t.transpose());
  }

private:
  RadialGrid grid_;
  double mass_;
  std::shared_ptr<const FourierTransform> fft_;
  VectorXd symbol_;
};

inline VectorXcd apply_kinetic(const RadialGrid& grid, double mass, const VectorXcd& psi) {
  return KineticOperator(grid, mass).apply(psi);
}

}  // namespace epflip
