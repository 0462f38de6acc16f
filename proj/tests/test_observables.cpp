#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "epflip/bound_states.hpp"
#include "epflip/observables.hpp"
#include "epflip/propagator.hpp"
#include "epflip/two_level.hpp"

using namespace epflip;

namespace {

const RadialGrid kGrid(0.5, 25.0, 1024);

const BoundStateBasis& h2_basis() {
  static const BoundStateBasis b = solve_bound(kGrid, builtin_h2plus());
  return b;
}

}  // namespace

TEST(Populations, BasisVectorAndSuperposition) {
  const auto& b = h2_basis();
  const auto p9 = populations(initial_state(b, 9), b);
  EXPECT_NEAR(p9.bound[9], 1.0, 1e-12);
  EXPECT_NEAR(p9.dissociated, 0.0, 1e-12);
  ChannelWavepacket mix = initial_state(b, 8);
  mix.chi1 = (mix.chi1 + initial_state(b, 9).chi1) / std::sqrt(2.0);
  const auto p = populations(mix, b);
  EXPECT_NEAR(p.bound[8], 0.5, 1e-12);
  EXPECT_NEAR(p.bound[9], 0.5, 1e-12);
}

TEST(Populations, OffSupportPacketIsDissociated) {
  const auto& b = h2_basis();
  ChannelWavepacket psi{VectorXcd(1024), VectorXcd::Zero(1024), 0.0};
  for (std::size_t i = 0; i < 1024; ++i) {
    const double x = kGrid.point(i) - 22.0;
    psi.chi1[static_cast<Eigen::Index>(i)] = std::exp(-x * x / 0.5) * std::exp(cplx(0.0, 5.0 * x));
  }
  psi.chi1 /= std::sqrt(psi.norm(kGrid.spacing()));
  const VectorXcd a = b.states.transpose().cast<cplx>() * psi.chi1 * kGrid.spacing();
  // Only the last few levels below threshold reach out to R = 22.
  EXPECT_LT(a.head(13).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(populations(psi, b).dissociated, 1.0, 1e-6);
}

TEST(Populations, RandomStatesNeverOvercount) {
  const auto& b = h2_basis();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    ChannelWavepacket psi{VectorXcd(1024), VectorXcd::Zero(1024), 0.0};
    for (Eigen::Index i = 0; i < 1024; ++i) psi.chi1[i] = {n(rng), n(rng)};
    psi.chi1 /= std::sqrt(psi.norm(kGrid.spacing()));
    const auto p = populations(psi, b);
    EXPECT_GE(p.dissociated, -1e-12);
    double sum = p.dissociated;
    for (const double x : p.bound) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
      sum += x;
    }
    EXPECT_DOUBLE_EQ(sum, 1.0);
  }
}

TEST(Populations, GridMismatch) {
  ChannelWavepacket psi{VectorXcd::Zero(64), VectorXcd::Zero(64), 0.0};
  EXPECT_THROW(populations(psi, h2_basis()), DomainError);
}

TEST(Fractions, Arithmetic) {
  std::vector<double> p(10, 0.0);
  p[3] = 0.7;
  auto f = surviving_fractions(p, 3, 2);
  EXPECT_DOUBLE_EQ(f.initial, 1.0);
  EXPECT_DOUBLE_EQ(f.target, 0.0);
  EXPECT_DOUBLE_EQ(f.other, 0.0);
  p = {0.1, 0.2, 0.2};
  f = surviving_fractions(p, 1, 2);
  EXPECT_DOUBLE_EQ(f.initial, 0.4);
  EXPECT_DOUBLE_EQ(f.target, 0.4);
  EXPECT_NEAR(f.other, 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(f.initial + f.target + f.other, 1.0);
  EXPECT_THROW(surviving_fractions(std::vector<double>(4, 0.0), 1, 0), NumericalError);
  EXPECT_THROW(surviving_fractions(p, 5, 0), DomainError);
}

TEST(EffectiveEnergy, StationaryState) {
  const auto& b = h2_basis();
  const auto pot = builtin_h2plus();
  const TwoChannelHamiltonian h(kGrid, pot, AbsorbingPotential{0.5, 20.0});
  const auto psi0 = initial_state(b, 5);
  SplitOperatorPropagator p(kGrid, pot, AbsorbingPotential{0.5, 20.0}, nullptr, 0.05);
  auto psi = psi0;
  for (int k = 0; k < 4; ++k) {
    const auto e = effective_energy(psi, h, 0.0, psi0);
    ASSERT_TRUE(e.has_value());
    EXPECT_NEAR(e->real(), b.energies[5], 1e-9);
    EXPECT_NEAR(e->imag(), 0.0, 1e-9);
    psi = propagate_to(p, psi, 50.0);
  }
}

TEST(EffectiveEnergy, UnderflowGivesGap) {
  const auto& b = h2_basis();
  const TwoChannelHamiltonian h(kGrid, builtin_h2plus(), AbsorbingPotential{});
  EXPECT_FALSE(effective_energy(initial_state(b, 4), h, 0.0, initial_state(b, 5)).has_value());
}

namespace {

// Driven two-level model H(t) = [[0, -W cos wt], [-W cos wt, w0]] with the
// coupling switched on by s(t).
struct Driven {
  double w0 = 1.0;
  double coupling = 0.1;
  double omega = 0.9;
  double ramp = 0.0;
  Eigen::Matrix2cd operator()(double t) const {
    const double s = ramp > 0.0 && t < ramp ? std::sin(0.5 * units::kPi * t / ramp) : 1.0;
    const double c = -s * coupling * std::cos(omega * t);
    Eigen::Matrix2cd h;
    h << 0.0, c, c, w0;
    return h;
  }
};

cplx eff(const Driven& h, const TwoLevelState& s, double t) {
  const Eigen::Vector2cd ref(1.0, 0.0);
  return *effective_energy(ref, h(t) * s.psi, s.psi);
}

// Largest |E_eff(t + T) - E_eff(t)| over one period after time t0.
double loop_mismatch(const Driven& h, TwoLevelState s, double t0) {
  const double period = 2.0 * units::kPi / h.omega;
  const int n = 64;
  std::vector<cplx> first;
  double t = t0;
  for (int k = 0; k < n; ++k) {
    first.push_back(eff(h, s, t));
    s = magnus4(h, s, t, t + period / n, 20);
    t += period / n;
  }
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    worst = std::max(worst, std::abs(eff(h, s, t) - first[static_cast<std::size_t>(k)]));
    s = magnus4(h, s, t, t + period / n, 20);
    t += period / n;
  }
  return worst;
}

}  // namespace

TEST(EffectiveEnergy, FloquetStateGivesPeriodicCorrection) {
  Driven h;
  const double period = 2.0 * units::kPi / h.omega;
  // One-period propagator; its eigenvectors are the Floquet states at t = 0.
  Eigen::Matrix2cd u;
  for (int j = 0; j < 2; ++j) {
    TwoLevelState s;
    s.psi = Eigen::Vector2cd::Unit(j);
    s = magnus4(h, s, 0.0, period, 4000);
    u.col(j) = s.psi * std::exp(s.log_norm);
  }
  const Eigen::Matrix2cd v = eigenvectors_2x2(u);
  TwoLevelState s;
  s.psi = std::abs(v(0, 0)) > std::abs(v(0, 1)) ? v.col(0) : v.col(1);
  EXPECT_LT(loop_mismatch(h, s, 0.0), 1e-8);
}

TEST(EffectiveEnergy, SlowSwitchOnClosesLoops) {
  Driven slow;
  slow.ramp = 2000.0;
  Driven fast;
  fast.ramp = 1.0;
  TwoLevelState a;
  a = magnus4(slow, a, 0.0, slow.ramp, 40000);
  TwoLevelState b;
  b = magnus4(fast, b, 0.0, fast.ramp, 100);
  const double closed = loop_mismatch(slow, a, slow.ramp);
  const double open = loop_mismatch(fast, b, fast.ramp);
  EXPECT_LT(closed, 1e-3);
  EXPECT_GT(open, 100.0 * closed);
}

TEST(Observables, SamplerRecord) {
  const auto& b = h2_basis();
  const auto pot = builtin_h2plus();
  const TwoChannelHamiltonian h(kGrid, pot, AbsorbingPotential{0.5, 20.0});
  const auto psi0 = initial_state(b, 9);
  ObservableSampler sample(b, h, [](double) { return 0.0; }, psi0, 9, 8);
  const auto r = sample(psi0);
  ASSERT_TRUE(r.fractions.has_value());
  EXPECT_NEAR(r.fractions->initial, 1.0, 1e-12);
  ASSERT_TRUE(r.effective_energy.has_value());
  EXPECT_NEAR(r.effective_energy->real(), b.energies[9], 1e-9);
  EXPECT_NEAR(r.norm, 1.0, 1e-12);
}
