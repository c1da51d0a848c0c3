#include "mathieu/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mathieu;

namespace {

SystemParams with_eps(double e, Rational w1 = Rational(9, 10)) {
  SystemParams p;
  p.omega1 = w1;
  p.epsilon = e;
  return p;
}

constexpr double kEpsCrit = 0.1857848626;

}  // namespace

TEST(DormandPrince, ExponentialAndBackward) {
  DormandPrince<1> dp;
  auto f = [](double, const std::array<double, 1>& y) { return std::array<double, 1>{y[0]}; };
  auto y = dp.advance(f, 0.0, {1.0}, 2.0);
  EXPECT_NEAR(y[0], std::exp(2.0), 1e-10);
  auto z = dp.advance(f, 2.0, y, 0.0);
  EXPECT_NEAR(z[0], 1.0, 1e-11);
}

TEST(DormandPrince, StepFailureOnBlowUp) {
  DormandPrince<1> dp;
  auto f = [](double, const std::array<double, 1>& y) { return std::array<double, 1>{y[0] * y[0]}; };
  EXPECT_THROW(dp.advance(f, 0.0, {1.0}, 2.0), StepFailure);
}

TEST(Orbit, HarmonicOscillatorAtZeroEps) {
  const auto p = with_eps(0.0);
  OrbitOptions opt;
  opt.samples_per_period = 13;
  const auto tr = integrate_orbit(p, 0, 1, 10, opt);
  ASSERT_EQ(tr.states.size(), 131u);
  for (const auto& s : tr.states) {
    EXPECT_NEAR(s.x, std::sin(0.9 * s.t) / 0.9, 1e-10);
    EXPECT_NEAR(s.y, std::cos(0.9 * s.t), 1e-10);
    EXPECT_DOUBLE_EQ(s.E, -0.5);
  }
}

TEST(Orbit, SectionTimesAreExact) {
  const auto p = with_eps(0.1);
  OrbitOptions opt;
  opt.samples_per_period = 5;
  const auto sec = stroboscopic_section(integrate_orbit(p, 0, 1, 40, opt));
  ASSERT_EQ(sec.size(), 41u);
  for (const auto& s : sec) EXPECT_LE(std::abs(s.t - s.k * p.period()), 1e-12 * p.period() * std::max(1L, s.k));
}

TEST(Orbit, RingWithHole) {
  const auto sec = section_orbit(with_eps(0.1), 0, 1, 200);
  double dmin = 1e9, dmax = 0;
  for (const auto& s : sec) {
    dmin = std::min(dmin, s.d);
    dmax = std::max(dmax, s.d);
    EXPECT_LE(s.d, 1.0 + 1e-9);
  }
  EXPECT_LT(dmin, 0.9);
  EXPECT_NEAR(dmax, 1.0, 1e-9);
}

TEST(Orbit, TimeHorizonLandsOnEndpoint) {
  OrbitOptions opt;
  opt.samples_per_period = 4;
  const auto tr = integrate_orbit_time(with_eps(0.1), 0, 1, 200.0, opt);
  EXPECT_DOUBLE_EQ(tr.states.back().t, 200.0);
  EXPECT_LE(tr.states[tr.states.size() - 2].t, 200.0);
}

TEST(Section, ZeroEpsEllipseAndAngleStep) {
  const auto sec = section_orbit(with_eps(0.0), 0, 1, 30);
  for (std::size_t i = 0; i < sec.size(); ++i) {
    EXPECT_NEAR(sec[i].d, 1.0, 1e-10);
    if (i == 0) continue;
    const double a0 = std::atan2(sec[i - 1].y, 0.9 * sec[i - 1].x), a1 = std::atan2(sec[i].y, 0.9 * sec[i].x);
    // clockwise rotation by omega1 T = 0.9 pi in the (omega1 x, y) plane
    EXPECT_NEAR(std::remainder(a0 - a1 - 0.9 * std::numbers::pi, 2 * std::numbers::pi), 0.0, 1e-9);
  }
}

TEST(Section, ReturnsNearMaximumAfterAbout13) {
  const auto sec = section_orbit(with_eps(0.1), 0, 1, 40);
  // first k >= 5 at which d comes back within 1% of 1
  long k = -1;
  for (const auto& s : sec)
    if (s.k >= 5 && s.d > 0.99) {
      k = s.k;
      break;
    }
  EXPECT_GE(k, 11);
  EXPECT_LE(k, 15);
}

TEST(Section, NegativeEpsOutsideUnperturbedEllipse) {
  for (const auto& s : section_orbit(with_eps(-0.1), 0, 1, 100)) EXPECT_GE(s.d, 1.0 - 1e-9);
}

TEST(Energy, ExtendedBookkeeping) {
  for (double e : {0.05, 0.1, 0.15, 0.18, -0.1}) {
    const auto p = with_eps(e);
    OrbitOptions opt;
    opt.samples_per_period = 10;
    const auto tr = integrate_orbit(p, 0, 1, 200, opt);
    double worst = 0;
    for (const auto& s : tr.states) worst = std::max(worst, std::abs(hamiltonian(p, s.x, s.y, s.t) + s.E));
    EXPECT_LE(worst, 1e-8) << "eps " << e;
  }
}

TEST(Flow, Reversibility) {
  const auto p = with_eps(0.1);
  const double T = p.period();
  const auto f = flow_map(p, 0, 1, 0, 50 * T);
  const auto b = flow_map(p, f[0], f[1], 50 * T, 0);
  EXPECT_NEAR(b[0], 0.0, 1e-7);
  EXPECT_NEAR(b[1], 1.0, 1e-7);
}

TEST(Flow, LinearityMatchesMonodromy) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-2, 2);
  const auto p = with_eps(0.13);
  const auto M = monodromy(p, 1);
  for (int i = 0; i < 20; ++i) {
    const double x = u(rng), y = u(rng);
    const auto f = flow_map(p, x, y, 0, p.period());
    const auto m = M.apply(x, y);
    EXPECT_NEAR(f[0], m[0], 1e-9);
    EXPECT_NEAR(f[1], m[1], 1e-9);
  }
}

TEST(Monodromy, TraceAtZeroEps) {
  EXPECT_NEAR(monodromy(with_eps(0.0), 1).trace(), 2 * std::cos(0.9 * std::numbers::pi), 1e-9);
  EXPECT_NEAR(monodromy(with_eps(0.0), 1).trace(), -1.9021130326, 1e-9);
}

TEST(Monodromy, UnitDeterminant) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(monodromy(with_eps(u(rng)), 1).det(), 1.0, 1e-9);
  EXPECT_NEAR(monodromy(with_eps(0.1), 7).det(), 1.0, 1e-9);
}

TEST(Monodromy, StabilityDichotomy) {
  for (double e : {0.05, 0.1, 0.15, 0.18}) EXPECT_LT(std::abs(monodromy(with_eps(e), 1).trace()), 2.0) << e;
  for (double e : {0.19, 0.25}) EXPECT_GT(std::abs(monodromy(with_eps(e), 1).trace()), 2.0) << e;
}

TEST(Monodromy, MarginalAtCriticalEps) {
  const auto M = monodromy(with_eps(kEpsCrit), 1);
  EXPECT_NEAR(std::abs(M.trace()), 2.0, 1e-5);
  for (const auto& l : M.eigenvalues()) EXPECT_NEAR(std::abs(l), 1.0, 1e-4);
}

TEST(Escape, BoundedAt01) {
  const auto sec = section_orbit(with_eps(0.1), 0, 1, kEscapeHorizon, kEscapeRadius);
  const auto r = escape_diagnostics(sec);
  EXPECT_FALSE(r.escaped);
  EXPECT_LE(r.r_max, 2.0);
}

TEST(Escape, LinearLogGrowth) {
  const auto s19 = section_orbit(with_eps(0.19), 0, 1, kEscapeHorizon, kEscapeRadius);
  const auto s20 = section_orbit(with_eps(0.20), 0, 1, kEscapeHorizon, kEscapeRadius);
  const auto r19 = escape_diagnostics(s19), r20 = escape_diagnostics(s20);
  ASSERT_TRUE(r19.escaped);
  ASSERT_TRUE(r20.escaped);
  EXPECT_GT(*r19.r_squared, 0.999);
  EXPECT_GT(*r20.growth_rate, *r19.growth_rate);
  EXPECT_LT(*r20.k_escape, *r19.k_escape);
}

TEST(Escape, RingBelowCriticalDistance) {
  // d(kT) <= 1 for eps below critical, approached recurrently
  const auto sec = section_orbit(with_eps(0.18), 0, 1, 300);
  int near_one = 0;
  for (const auto& s : sec) {
    EXPECT_LE(s.d, 1.0 + 1e-8);
    if (s.k > 0 && s.d > 0.999) ++near_one;
  }
  EXPECT_GE(near_one, 3);
}

TEST(Orbit, Errors) {
  EXPECT_THROW(integrate_orbit(with_eps(0.1), 0, 1, 0), DomainError);
  EXPECT_THROW(monodromy(with_eps(0.1), 0), DomainError);
  EXPECT_THROW(escape_diagnostics({}), DomainError);
}
