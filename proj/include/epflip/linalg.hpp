#pragma once

#include <complex>
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <random>
#include <vector>
#include <string>

#include "epflip/errors.hpp"

namespace epflip::linalg {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, unit Euclidean norm
};

/// Eigenpairs of a real symmetric matrix with eigenvalue <= upper.
inline SymmetricEigen symmetric_eigen_below(Eigen::MatrixXd a, double upper) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw NumericalError("symmetric_eigen_below: matrix not square");
  SymmetricEigen out;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, n);
  Eigen::VectorXi support(2 * n);
  lapack_int found = 0;
  const double lower = -std::numeric_limits<double>::max();
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, a.data(), n, lower, upper, 0, 0, 0.0,
                     &found, w.data(), z.data(), n, support.data());
  if (info != 0) throw NumericalError("dsyevr failed, info = " + std::to_string(info));
  out.values = w.head(found);
  out.vectors = z.leftCols(found);
  return out;
}

/// Full spectrum of a real symmetric matrix.
inline SymmetricEigen symmetric_eigen(Eigen::MatrixXd a) {
  return symmetric_eigen_below(std::move(a), std::numeric_limits<double>::max());
}

struct GeneralEigen {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // right eigenvectors, unit Euclidean norm
};

/// Eigenvalues and right eigenvectors of a general complex matrix.
inline GeneralEigen general_eigen(Eigen::MatrixXcd a, bool want_vectors = true) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw NumericalError("general_eigen: matrix not square");
  GeneralEigen out;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  std::complex<double> dummy;
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n, out.values.data(), &dummy,
      1, want_vectors ? out.vectors.data() : &dummy, want_vectors ? n : 1);
  if (info != 0) throw NumericalError("zgeev failed, info = " + std::to_string(info));
  return out;
}

/// Eigenpairs of a general complex matrix closest to a shift.
struct NearbyEigen {
  Eigen::VectorXcd values;   // ordered by distance to the shift
  Eigen::MatrixXcd vectors;  // unit Euclidean norm
};

/// Up to `count` eigenpairs of `a` nearest to `shift`, by shift-invert
/// subspace iteration with Rayleigh-Ritz extraction. Columns of `start` seed
/// the subspace; the rest is filled deterministically. Pairs that fail to
/// converge are left out, except the nearest one, which must converge.
inline NearbyEigen nearby_eigen(const Eigen::MatrixXcd& a, std::complex<double> shift,
                               Eigen::Index count, const Eigen::MatrixXcd& start = {},
                               double tolerance = 1e-11, int max_iterations = 120) {
  using Eigen::Index;
  using Eigen::MatrixXcd;
  const Index n = a.rows();
  if (a.cols() != n) throw NumericalError("nearby_eigen: matrix not square");
  if (count < 1) throw NumericalError("nearby_eigen: count must be >= 1");
  count = std::min(count, n);
  const Index m = std::min(n, count + std::max<Index>(6, count));

  if (n <= 2 * m) {
    // Small problem: dense solve is cheaper than setting up the iteration.
    Eigen::ComplexEigenSolver<MatrixXcd> es(a);
    if (es.info() != Eigen::Success) throw NumericalError("nearby_eigen: dense solve failed");
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
      return std::abs(es.eigenvalues()[i] - shift) < std::abs(es.eigenvalues()[j] - shift);
    });
    NearbyEigen out;
    out.values.resize(count);
    out.vectors.resize(n, count);
    for (Index k = 0; k < count; ++k) {
      const Index j = order[static_cast<std::size_t>(k)];
      out.values[k] = es.eigenvalues()[j];
      out.vectors.col(k) = es.eigenvectors().col(j).normalized();
    }
    return out;
  }

  // The shift is nudged off any exact eigenvalue so the factorization stays
  // regular; inverse iteration tolerates a nearly singular one. Every
  // `refresh` sweeps the factorization is redone at the centroid of the
  // still unconverged wanted Ritz values, which speeds up clustered spectra.
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const std::complex<double> nudge(1e-10 * scale, 0.7e-10 * scale);
  auto factor = [&](std::complex<double> s) {
    MatrixXcd shifted = a;
    shifted.diagonal().array() -= s + nudge;
    return Eigen::PartialPivLU<MatrixXcd>(shifted);
  };
  Eigen::PartialPivLU<MatrixXcd> lu = factor(shift);
  constexpr int refresh = 6;

  MatrixXcd q(n, m);
  const Index seeded = std::min<Index>(start.cols(), m);
  if (seeded > 0 && start.rows() == n) q.leftCols(seeded) = start.leftCols(seeded);
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  for (Index j = (start.rows() == n ? seeded : 0); j < m; ++j) {
    for (Index i = 0; i < n; ++i) q(i, j) = std::complex<double>(normal(rng), normal(rng));
  }

  // Ritz pairs are accepted once their residual drops below the tolerance.
  // A pair that stalls (one of two eigenvalues at the same distance from the
  // shift, or a nearly defective box-state pair) is dropped after the
  // iteration budget; the nearest pair must always converge.
  std::vector<double> residual(static_cast<std::size_t>(count));
  NearbyEigen out;
  for (int it = 0; it < max_iterations; ++it) {
    const MatrixXcd z = lu.solve(q);
    if (!z.allFinite()) throw NumericalError("nearby_eigen: singular shifted matrix");
    Eigen::HouseholderQR<MatrixXcd> qr(z);
    q = qr.householderQ() * MatrixXcd::Identity(n, m);
    const MatrixXcd projected = q.adjoint() * a * q;
    Eigen::ComplexEigenSolver<MatrixXcd> es(projected);
    if (es.info() != Eigen::Success) throw NumericalError("nearby_eigen: Ritz solve failed");
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
      return std::abs(es.eigenvalues()[i] - shift) < std::abs(es.eigenvalues()[j] - shift);
    });
    out.values.resize(count);
    out.vectors.resize(n, count);
    double worst = 0.0;
    std::complex<double> centroid = 0.0;
    int open = 0;
    for (Index k = 0; k < count; ++k) {
      const Index j = order[static_cast<std::size_t>(k)];
      Eigen::VectorXcd x = q * es.eigenvectors().col(j);
      x.normalize();
      out.values[k] = es.eigenvalues()[j];
      out.vectors.col(k) = x;
      const double r = (a * x - out.values[k] * x).norm();
      residual[static_cast<std::size_t>(k)] = r;
      worst = std::max(worst, r);
      if (!(r < tolerance * scale)) {
        centroid += out.values[k];
        ++open;
      }
    }
    if (worst < tolerance * scale) return out;
    if ((it + 1) % refresh == 0 && open > 0) lu = factor(centroid / static_cast<double>(open));
  }
  if (!(residual[0] < tolerance * scale)) {
    throw NumericalError("nearby_eigen: subspace iteration did not converge");
  }
  NearbyEigen kept;
  std::vector<Index> good;
  for (Index k = 0; k < count; ++k) {
    if (residual[static_cast<std::size_t>(k)] < tolerance * scale) good.push_back(k);
  }
  kept.values.resize(static_cast<Index>(good.size()));
  kept.vectors.resize(n, static_cast<Index>(good.size()));
  for (std::size_t g = 0; g < good.size(); ++g) {
    kept.values[static_cast<Index>(g)] = out.values[good[g]];
    kept.vectors.col(static_cast<Index>(g)) = out.vectors.col(good[g]);
  }
  return kept;
}

/// Eigenvalues of a 2x2 complex matrix, closed form.
inline std::array<std::complex<double>, 2> eigenvalues_2x2(const Eigen::Matrix2cd& h) {
  const std::complex<double> mean = 0.5 * (h(0, 0) + h(1, 1));
  const std::complex<double> half = 0.5 * (h(0, 0) - h(1, 1));
  const std::complex<double> root = std::sqrt(half * half + h(0, 1) * h(1, 0));
  return {mean - root, mean + root};
}

/// exp(-i h tau) for a 2x2 complex matrix via Cayley-Hamilton.
inline Eigen::Matrix2cd expm_2x2(const Eigen::Matrix2cd& h, double tau) {
  const std::complex<double> mean = 0.5 * (h(0, 0) + h(1, 1));
  Eigen::Matrix2cd n = h;
  n(0, 0) -= mean;
  n(1, 1) -= mean;
  const std::complex<double> q = std::sqrt(n(0, 0) * n(0, 0) + n(0, 1) * n(1, 0));
  const std::complex<double> x = q * tau;
  // sin(x)/x stays finite through the EP where q = 0.
  const std::complex<double> sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 + x * x * x * x / 120.0
                                                        : std::sin(x) / x;
  const std::complex<double> i(0.0, 1.0);
  const Eigen::Matrix2cd u = std::cos(x) * Eigen::Matrix2cd::Identity() - i * tau * sinc * n;
  return std::exp(-i * mean * tau) * u;
}

}  // namespace epflip::linalg
