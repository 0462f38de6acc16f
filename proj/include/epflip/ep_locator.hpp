#pragma once

// Exceptional-point search in a two-parameter plane: nested grid refinement
// of the eigenvalue separation |E_a - E_b|, then a square-root signature
// check along the four axis directions through the candidate.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "epflip/errors.hpp"
#include "epflip/linalg.hpp"

namespace epflip {

struct SearchBox {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;

  double width() const noexcept { return x_hi - x_lo; }
  double height() const noexcept { return y_hi - y_lo; }
  bool contains(double x, double y) const noexcept {
    return x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi;
  }
};

struct EpSearchOptions {
  std::size_t grid = 9;              // points per axis and level
  double separation_tol = 1e-8;      // stop when |E_a - E_b| falls below
  double tol_x = 1e-6;               // stop when the box is this small
  double tol_y = 1e-6;
  std::size_t max_levels = 80;
  double probe_fraction = 0.02;      // largest signature step, as a fraction of the box
  std::size_t probe_steps = 6;       // halvings of the signature step
  double exponent_margin = 0.1;      // accepted |exponent - 0.5|
};

enum class EpStatus { found, outside_box, avoided_crossing };

inline const char* to_string(EpStatus s) {
  switch (s) {
    case EpStatus::found: return "found";
    case EpStatus::outside_box: return "outside_box";
    case EpStatus::avoided_crossing: return "avoided_crossing";
  }
  return "unknown";
}

struct EpCandidate {
  double x = 0.0;
  double y = 0.0;
  double separation = 0.0;
  EpStatus status = EpStatus::found;
  std::array<double, 4> exponents{};  // +x, -x, +y, -y
  double exponent = 0.0;              // mean of the four
  bool grows_everywhere = false;      // separation larger at every probe point
  std::size_t levels = 0;
  std::size_t evaluations = 0;
  std::string label_a;
  std::string label_b;

  std::string report() const {
    std::ostringstream o;
    o.precision(12);
    o << "status = " << to_string(status) << '\n'
      << "x = " << x << '\n'
      << "y = " << y << '\n'
      << "separation = " << separation << '\n'
      << "exponent = " << exponent << '\n'
      << "exponents = " << exponents[0] << ' ' << exponents[1] << ' ' << exponents[2] << ' '
      << exponents[3] << '\n'
      << "grows_everywhere = " << (grows_everywhere ? "true" : "false") << '\n'
      << "levels = " << levels << '\n'
      << "evaluations = " << evaluations << '\n';
    if (!label_a.empty()) o << "branches = " << label_a << ' ' << label_b << '\n';
    return o.str();
  }
};

/// Least-squares slope of log s against log d.
inline double log_log_slope(const std::vector<double>& d, const std::vector<double>& s) {
  if (d.size() != s.size() || d.size() < 2) throw DomainError("log_log_slope: need >= 2 matching points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!(d[k] > 0.0) || !(s[k] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    mx += std::log(d[k]);
    my += std::log(s[k]);
  }
  mx /= static_cast<double>(d.size());
  my /= static_cast<double>(d.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double a = std::log(d[k]) - mx;
    sxy += a * (std::log(s[k]) - my);
    sxx += a * a;
  }
  return sxy / sxx;
}

/// Minimises separation(x, y) over `box`. `separation` may throw; such a
/// point counts as infinitely separated.
inline EpCandidate locate_ep(const std::function<double(double, double)>& separation,
                             const SearchBox& box, const EpSearchOptions& opt = {}) {
  if (!(box.width() > 0.0) || !(box.height() > 0.0)) throw DomainError("locate_ep: empty search box");
  if (opt.grid < 3) throw DomainError("locate_ep: grid must have >= 3 points per axis");
  EpCandidate out;
  auto eval = [&](double x, double y) {
    ++out.evaluations;
    try {
      const double s = separation(x, y);
      return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  SearchBox cur = box;
  double best = std::numeric_limits<double>::infinity();
  const double n1 = static_cast<double>(opt.grid - 1);
  for (std::size_t level = 0; level < opt.max_levels; ++level) {
    out.levels = level + 1;
    const double hx = cur.width() / n1;
    const double hy = cur.height() / n1;
    std::size_t bi = 0;
    std::size_t bj = 0;
    best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < opt.grid; ++i) {
      for (std::size_t j = 0; j < opt.grid; ++j) {
        const double s = eval(cur.x_lo + static_cast<double>(i) * hx, cur.y_lo + static_cast<double>(j) * hy);
        if (s < best) {
          best = s;
          bi = i;
          bj = j;
        }
      }
    }
    out.x = cur.x_lo + static_cast<double>(bi) * hx;
    out.y = cur.y_lo + static_cast<double>(bj) * hy;
    out.separation = best;
    if (!std::isfinite(best)) throw NumericalError("locate_ep: separation undefined on the whole grid");
    // A minimum on the edge of the original box: the EP (if any) lies outside.
    const bool on_edge_x = (bi == 0 && cur.x_lo <= box.x_lo) || (bi + 1 == opt.grid && cur.x_hi >= box.x_hi);
    const bool on_edge_y = (bj == 0 && cur.y_lo <= box.y_lo) || (bj + 1 == opt.grid && cur.y_hi >= box.y_hi);
    if (on_edge_x || on_edge_y) {
      out.status = EpStatus::outside_box;
      return out;
    }
    if (best < opt.separation_tol || (hx < opt.tol_x && hy < opt.tol_y)) break;
    cur = {std::max(box.x_lo, out.x - hx), std::min(box.x_hi, out.x + hx),
           std::max(box.y_lo, out.y - hy), std::min(box.y_hi, out.y + hy)};
  }

  // Square-root signature along +-x and +-y.
  const std::array<std::array<double, 2>, 4> dirs{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}};
  out.grows_everywhere = true;
  double sum = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<double> d;
    std::vector<double> s;
    const double scale = dirs[k][0] != 0.0 ? box.width() : box.height();
    double step = opt.probe_fraction * scale;
    for (std::size_t m = 0; m < opt.probe_steps; ++m, step *= 0.5) {
      const double px = out.x + dirs[k][0] * step;
      const double py = out.y + dirs[k][1] * step;
      const double sp = eval(px, py);
      if (!(sp > out.separation)) out.grows_everywhere = false;
      d.push_back(step);
      s.push_back(sp);
    }
    out.exponents[k] = log_log_slope(d, s);
    sum += out.exponents[k];
  }
  out.exponent = sum / 4.0;
  const bool signature = std::all_of(out.exponents.begin(), out.exponents.end(), [&](double e) {
    return std::abs(e - 0.5) <= opt.exponent_margin;
  });
  out.status = signature && out.grows_everywhere ? EpStatus::found : EpStatus::avoided_crossing;
  return out;
}

/// |E_+ - E_-| of H(x, y) = [[0, x + iy], [1, 0]]; EP at the origin.
inline double analytic_family_separation(double x, double y) {
  Eigen::Matrix2cd h;
  h << 0.0, std::complex<double>(x, y), 1.0, 0.0;
  const auto e = linalg::eigenvalues_2x2(h);
  return std::abs(e[0] - e[1]);
}

/// Hermitian avoided crossing [[x, c], [c, -x]] + y: gap 2 sqrt(x^2 + c^2)
/// plus a tilt so the minimum is isolated.
inline double avoided_crossing_separation(double x, double y, double c = 1e-3) {
  return 2.0 * std::sqrt(x * x + y * y + c * c);
}

}  // namespace epflip
