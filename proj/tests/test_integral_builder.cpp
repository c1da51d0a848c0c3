#include "mathieu/analysis.hpp"
#include "mathieu/integral_builder.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace mathieu;

namespace {

SystemParams params(Rational w, Rational w1) {
  SystemParams p;
  p.omega = w;
  p.omega1 = w1;
  return p;
}

const SystemParams kDefault = params(Rational(2), Rational(9, 10));

Rational coeff(const RationalSeries& s, int p, int k, Phase ph) {
  auto it = s.terms().find({p, {k, 0}, ph});
  return it == s.terms().end() ? Rational(0) : it->second;
}

// random non-resonant pairs through order 3 (j omega != 2 omega1, j <= 4)
std::vector<std::pair<Rational, Rational>> random_pairs(unsigned seed, int n) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> num(1, 40), den(1, 12);
  std::vector<std::pair<Rational, Rational>> out;
  while (static_cast<int>(out.size()) < n) {
    Rational w(num(rng), den(rng)), w1(num(rng), den(rng));
    bool ok = true;
    for (int j = 1; j <= 4; ++j) ok = ok && Rational(j) * w != 2 * w1;
    if (ok) out.emplace_back(w, w1);
  }
  return out;
}

QuadFormSeries<Rational> const_form(const Lattice& lat, Rational xx, Rational yy, Rational xy) {
  return {RationalSeries::constant(lat, xx), RationalSeries::constant(lat, yy), RationalSeries::constant(lat, xy)};
}

}  // namespace

TEST(PoissonBracket, Examples) {
  const Lattice lat = kDefault.lattice();
  auto k0 = poisson_bracket_with_H1(h0_form<Rational>(lat));
  EXPECT_TRUE(k0.cxx.empty());
  EXPECT_TRUE(k0.cyy.empty());
  EXPECT_EQ(k0.cxy, RationalSeries::cosine(lat, {1, 0}, Rational(-2)));

  auto ky = poisson_bracket_with_H1(const_form(lat, 0, Rational(3, 5), 0));
  EXPECT_EQ(ky.cxy, RationalSeries::cosine(lat, {1, 0}, Rational(-12, 5)));

  EXPECT_TRUE(poisson_bracket_with_H1(const_form(lat, 7, 0, 0)).empty());
}

TEST(ZeroOrder, SubstituteExamples) {
  const Lattice lat = kDefault.lattice();
  const Rational w1 = lat.omega1;
  const auto one = RationalSeries::constant(lat, Rational(1));
  const auto cb = RationalSeries::cosine(lat, {0, 2});
  EXPECT_EQ(substitute_zero_order(const_form(lat, 1, 0, 0)), (one - cb) * Rational(1 / (2 * w1 * w1)));
  EXPECT_EQ(substitute_zero_order(const_form(lat, 0, 1, 0)), (one + cb) * Rational(1, 2));
  EXPECT_EQ(substitute_zero_order(const_form(lat, 0, 0, 1)), RationalSeries::sine(lat, {0, 2}, Rational(1 / (2 * w1))));
}

TEST(ZeroOrder, BackSubstituteExamples) {
  const Lattice lat = kDefault.lattice();
  const Rational w1sq = lat.omega1 * lat.omega1;
  auto q = back_substitute(RationalSeries::cosine(lat, {0, 2}));
  EXPECT_EQ(q, const_form(lat, -w1sq, 1, 0));
  auto one = back_substitute(RationalSeries::constant(lat, Rational(1)));
  EXPECT_EQ(one, const_form(lat, w1sq, 1, 0));
  EXPECT_THROW(back_substitute(RationalSeries::cosine(lat, {0, 4})), MalformedSpectrum);
  EXPECT_THROW(back_substitute(RationalSeries::cosine(lat, {0, 0}, Rational(1), 1)), SecularTerm);
}

TEST(ZeroOrder, RoundTripBasisAndRandomForms) {
  const Lattice lat = kDefault.lattice();
  for (auto f : {const_form(lat, 1, 0, 0), const_form(lat, 0, 1, 0), const_form(lat, 0, 0, 1)})
    EXPECT_EQ(back_substitute(substitute_zero_order(f)), f);
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> num(-20, 20), den(1, 9), k(0, 3), ph(0, 1);
  for (int i = 0; i < 50; ++i) {
    // quadratic forms with trigonometric coefficients in multiples of omega
    QuadFormSeries<Rational> f(lat);
    for (auto* s : {&f.cxx, &f.cyy, &f.cxy})
      for (int t = 0; t < 3; ++t) s->add_term({0, {k(rng), 0}, ph(rng) ? Phase::Sin : Phase::Cos}, Rational(num(rng), den(rng)));
    EXPECT_EQ(back_substitute(substitute_zero_order(f)), f) << "case " << i;
  }
}

TEST(BuildIntegral, OrderZeroIsH0) {
  auto phi = build_integral(kDefault, 0);
  ASSERT_EQ(phi.order(), 0);
  EXPECT_EQ(phi.orders[0], h0_form<Rational>(kDefault.lattice()));
}

TEST(BuildIntegral, FirstOrderClosedForm) {
  auto pairs = random_pairs(5, 5);
  pairs.insert(pairs.begin(), {Rational(2), Rational(9, 10)});
  for (const auto& [w, w1] : pairs) {
    const auto phi = build_integral(params(w, w1), 1);
    const Lattice lat = phi.params.lattice();
    const Rational D = w * w - 4 * w1 * w1;
    const auto cos1 = RationalSeries::cosine(lat, {1, 0});
    const auto one = RationalSeries::constant(lat, Rational(1));
    // C_x = 4 (cos + 1)/D, C_y = -4 (cos - 1)/D, C_xy = -4 omega sin/D;
    // cxx = omega1^2/2 C_x, cyy = C_y/2, cxy = C_xy/2
    EXPECT_EQ(phi.orders[1].cxx, (cos1 + one) * Rational(w1 * w1 / 2 * 4 / D));
    EXPECT_EQ(phi.orders[1].cyy, (cos1 - one) * Rational(Rational(-1, 2) * 4 / D));
    EXPECT_EQ(phi.orders[1].cxy, RationalSeries::sine(lat, {1, 0}, Rational(-2 * w / D)));
  }
}

TEST(BuildIntegral, SecondOrderCos2wtOfCy) {
  auto pairs = random_pairs(17, 5);
  pairs.insert(pairs.begin(), {Rational(2), Rational(9, 10)});
  for (const auto& [w, w1] : pairs) {
    const auto phi = build_integral(params(w, w1), 2);
    const Rational D = w * w - 4 * w1 * w1, E = w * w - w1 * w1;
    const Rational cy = 3 * D / (D * D * E);
    EXPECT_EQ(coeff(phi.orders[2].cyy, 0, 2, Phase::Cos), cy / 2) << to_string(w) << " " << to_string(w1);
  }
}

TEST(BuildIntegral, KnownSecondOrderValuesAtDefault) {
  const auto phi = build_integral(kDefault, 2);
  const auto& q = phi.orders[2];
  EXPECT_EQ(coeff(q.cyy, 0, 2, Phase::Cos), Rational(3750, 6061));
  // cyy = C_y / 2; checked against dPhi2/dt + [Phi2, H0] + [Phi1, H1] = 0 in sympy
  EXPECT_EQ(coeff(q.cyy, 0, 1, Phase::Cos), Rational(-5000, 361));
  EXPECT_EQ(coeff(q.cyy, 0, 0, Phase::Cos), Rational(1523750, 115159));
  EXPECT_EQ(coeff(q.cxx, 0, 1, Phase::Cos), Rational(4050, 361));
  EXPECT_EQ(coeff(q.cxx, 0, 2, Phase::Cos), Rational(-22025, 12122));
  EXPECT_EQ(coeff(q.cxx, 0, 0, Phase::Cos), Rational(3074575, 230318));
  EXPECT_EQ(coeff(q.cxy, 0, 1, Phase::Sin), Rational(-10000, 361));
  EXPECT_EQ(coeff(q.cxy, 0, 2, Phase::Sin), Rational(15000, 6061));
}

TEST(BuildIntegral, StructuralInvariants) {
  const auto phi = build_integral(kDefault, 12);
  for (int s = 0; s <= phi.order(); ++s) {
    const auto& q = phi.orders[static_cast<std::size_t>(s)];
    EXPECT_EQ(q.max_secular_degree(), 0);
    for (const auto* series : {&q.cxx, &q.cyy, &q.cxy})
      for (const auto& [key, c] : series->terms()) {
        EXPECT_LE(key.freq.k, s);
        EXPECT_EQ(key.freq.m, 0);
      }
    for (const auto& [key, c] : q.cxy.terms()) EXPECT_EQ(key.phase, Phase::Sin);
    for (const auto& [key, c] : q.cxx.terms()) EXPECT_EQ(key.phase, Phase::Cos);
    for (const auto& [key, c] : q.cyy.terms()) EXPECT_EQ(key.phase, Phase::Cos);
  }
  EXPECT_EQ(conic_at_section(phi, 0.1).D, 0.0);
}

TEST(BuildIntegral, ResonanceDetected) {
  try {
    build_integral(params(Rational(2), Rational(1)), 3);
    FAIL() << "expected ResonanceDetected";
  } catch (const ResonanceDetected& e) {
    EXPECT_EQ(e.harmonic(), 1);
  }
  // 2 omega = 2 omega1 first shows up at order 1 (j = 2 <= S + 1)
  EXPECT_NO_THROW(build_integral(params(Rational(2), Rational(2)), 0));
  EXPECT_THROW(build_integral(params(Rational(2), Rational(2)), 1), ResonanceDetected);
  EXPECT_THROW(build_integral(kDefault, kMaxOrder + 1), DomainError);
}

TEST(BuildIntegral, Order28Builds) {
  const auto phi = build_integral(kDefault, 28);
  EXPECT_EQ(phi.order(), 28);
}

// Denominators: only (j omega)^2 - 4 omega1^2 type factors appear. At
// (2, 9/10), omega^2 - 9 omega1^2 = -7*47/100 would bring the prime 47; the
// j = 3 factor 9 omega^2 - 4 omega1^2 = 3^2*7*13/25 brings 13.
// 47 divides omega^2 - 9 omega1^2 but only enters with j = 15: 3^2*47*53/25.
TEST(BuildIntegral, DenominatorPrimes) {
  const auto phi = build_integral(kDefault, 15);
  auto has_prime = [](const Integer& n, long p) { return n % p == 0; };
  auto order_has = [&](int s, long p) {
    for (const auto* series : {&phi.orders[s].cxx, &phi.orders[s].cyy, &phi.orders[s].cxy})
      for (const auto& [key, c] : series->terms())
        if (has_prime(denominator_of(c), p)) return true;
    return false;
  };
  for (int s = 0; s < 3; ++s) EXPECT_FALSE(order_has(s, 13)) << "order " << s;
  EXPECT_TRUE(order_has(3, 13));
  for (int s = 0; s < 15; ++s) EXPECT_FALSE(order_has(s, 47)) << "order " << s;
  EXPECT_TRUE(order_has(15, 47));
}

TEST(EvalIntegral, Examples) {
  const auto phi = build_integral(kDefault, 6);
  const double w1 = 0.9;
  EXPECT_NEAR(eval_integral(phi, 0.3, -0.4, 1.7, 0.0), 0.5 * (0.16 + w1 * w1 * 0.09), 1e-15);
  // at (0, 1, 0): cyy_1(0) = 0, so the value is 1/2 + O(eps^2)
  const double e = 1e-3;
  EXPECT_NEAR(eval_integral(phi, 0, 1, 0, e), 0.5, 50 * e * e);
  EXPECT_EQ(phi.orders[1].cyy.value_at_zero(), Rational(0));
}

TEST(Conic, SectionCoefficients) {
  const auto phi = build_integral(kDefault, 8);
  const auto sc = section_coefficients(phi);
  const Rational w1sq(81, 100), D(19, 25);
  EXPECT_EQ(sc[0].xx, w1sq / 2);
  EXPECT_EQ(sc[0].yy, Rational(1, 2));
  EXPECT_EQ(sc[1].xx, w1sq / 2 * 8 / D);
  EXPECT_EQ(sc[1].yy, Rational(0));
  for (const auto& c : sc) EXPECT_EQ(c.xy, Rational(0));
  const Conic c0 = conic_at_section(phi, 0.0);
  EXPECT_DOUBLE_EQ(c0.A, 0.405);
  EXPECT_DOUBLE_EQ(c0.B, 0.5);
  // semiaxis a ~ (1/omega1)(1 - 4 eps/(omega^2 - 4 omega1^2))
  const double e = 1e-3;
  const double a = section_x_semiaxis(phi, e);
  EXPECT_NEAR(a, (1 / 0.9) * (1 - 4 * e / 0.76), 1e-4);
}

TEST(Psi, ExactIdentities) {
  const auto phi = build_integral(kDefault, 4);
  const auto psi = psi_series(phi);
  const Lattice lat = kDefault.lattice();
  EXPECT_EQ(psi.orders[1] + phi.orders[1], h1_form<Rational>(lat));
  EXPECT_EQ(psi.orders[2], -phi.orders[2]);
  // closed form {[(2 w1^2 - w^2) x^2 + 2 y^2] cos + 2 w sin xy - 2 (w1^2 x^2 + y^2)}/D
  const Rational w(2), w1sq(81, 100), D = w * w - 4 * w1sq;
  const auto cos1 = RationalSeries::cosine(lat, {1, 0});
  const auto one = RationalSeries::constant(lat, Rational(1));
  EXPECT_EQ(psi.orders[1].cxx, (cos1 * Rational(2 * w1sq - w * w) - one * Rational(2 * w1sq)) * Rational(1 / D));
  EXPECT_EQ(psi.orders[1].cyy, (cos1 * Rational(2) - one * Rational(2)) * Rational(1 / D));
  EXPECT_EQ(psi.orders[1].cxy, RationalSeries::sine(lat, {1, 0}, Rational(2 * w / D)));
}

TEST(Psi, PhiPlusPsiVanishesAlongOrbit) {
  const auto phi = build_integral(kDefault, 6);
  const auto psi = psi_series(phi);
  const CompiledIntegral cphi(phi), cpsi(psi);
  SystemParams p = kDefault;
  p.epsilon = 0.1;
  OrbitOptions opt;
  opt.samples_per_period = 7;
  const auto tr = integrate_orbit(p, 0, 1, 50, opt);
  for (const auto& s : tr.states) EXPECT_NEAR(cphi(s.x, s.y, s.t, 0.1) + cpsi(s.x, s.y, s.t, 0.1, s.E), 0.0, 1e-6);
}

TEST(Residual, DerivativeAlongOrbitDecreasesWithOrder) {
  // R_S = d Phi_S / dt along the orbit by central differences
  SystemParams p = kDefault;
  p.epsilon = 0.1;
  const auto phi = build_integral(kDefault, 6);
  const CompiledIntegral c(phi);
  OrbitOptions opt;
  opt.samples_per_period = 64;
  const auto tr = integrate_orbit(p, 0, 1, 20, opt);
  std::vector<double> worst;
  for (int S : {2, 4, 6}) {
    double m = 0.0;
    for (std::size_t i = 1; i + 1 < tr.states.size(); ++i) {
      const auto &a = tr.states[i - 1], &b = tr.states[i + 1];
      const double d = (c.evaluate(b.x, b.y, b.t, 0.1, S) - c.evaluate(a.x, a.y, a.t, 0.1, S)) / (b.t - a.t);
      m = std::max(m, std::abs(d));
    }
    worst.push_back(m);
  }
  EXPECT_GT(worst[0], worst[1]);
  EXPECT_GT(worst[1], worst[2]);
}

// The truncated section conic converges to the exact invariant form of the
// one-period map (independent monodromy oracle).
TEST(Conic, ConvergesToMonodromyInvariant) {
  SystemParams p = kDefault;
  p.epsilon = 0.1;
  const Monodromy M = monodromy(p, 1);
  const double A = M.m21, B = -M.m12;  // invariant form m21 x^2 - m12 y^2 + (m22 - m11) xy
  const auto phi = build_integral(kDefault, 28);
  const Conic c = conic_at_section(phi, 0.1);
  EXPECT_NEAR(c.A / c.B, A / B, 1e-7);
  EXPECT_NEAR(M.m22 - M.m11, 0.0, 1e-10);
}
