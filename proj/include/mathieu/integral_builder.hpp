#pragma once

#include "mathieu/errors.hpp"
#include "mathieu/quad_form.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace mathieu {

/// H = 1/2 (y^2 + omega1^2 x^2) - epsilon x^2 cos(omega t).
struct SystemParams {
  Rational omega{2};
  Rational omega1{Rational(9, 10)};
  double epsilon = 0.0;

  Lattice lattice() const { return {omega, omega1}; }
  double omega_value() const { return to_double(omega); }
  double omega1_value() const { return to_double(omega1); }
  double period() const { return 2.0 * std::numbers::pi / omega_value(); }
  /// Mathieu form x'' + (a - 2q cos 2t') x = 0 with omega t = 2t'.
  double mathieu_a() const { return to_double(Rational(4) * omega1 * omega1 / (omega * omega)); }
  double mathieu_q() const { return 4.0 * epsilon / (omega_value() * omega_value()); }

  void validate() const {
    if (omega <= 0 || omega1 <= 0) throw DomainError("omega and omega1 must be positive");
  }
};

enum class Seed { H0, C0, S0, E };

inline std::string to_string(Seed s) {
  switch (s) {
    case Seed::H0: return "H0";
    case Seed::C0: return "C0";
    case Seed::S0: return "S0";
    case Seed::E: return "E";
  }
  return "?";
}

/// Truncated integral Phi_0 + eps Phi_1 + ... + eps^S Phi_S. Epsilon is not
/// part of the symbolic data, so one build serves every epsilon.
template <class Coeff>
struct FormalIntegral {
  SystemParams params;
  std::vector<QuadFormSeries<Coeff>> orders;
  Seed seed = Seed::H0;
  bool secular_allowed = false;
  // For seed E the integral carries an additive E (the momentum conjugate to t).
  bool has_energy_term = false;

  int order() const { return static_cast<int>(orders.size()) - 1; }

  /// The first S + 1 orders.
  FormalIntegral truncated(int S) const {
    FormalIntegral out = *this;
    out.orders.resize(static_cast<std::size_t>(S) + 1, QuadFormSeries<Coeff>(params.lattice()));
    return out;
  }
};

using RationalIntegral = FormalIntegral<Rational>;

// ---------------------------------------------------------------------------
// Zero-order bridge. With 2 Phi0 = 1 the unperturbed orbit gives
//   x^2 = (1 - cos B)/(2 omega1^2), y^2 = (1 + cos B)/2, xy = sin B/(2 omega1)
// where B = 2 omega1 t (unphased) or B = 2 omega1 (t - t0) (phased; t0 enters
// through c0, s0). Back-substitution inverts it: 1 -> y^2 + omega1^2 x^2,
// cos B -> y^2 - omega1^2 x^2, sin B -> 2 omega1 xy.
// ---------------------------------------------------------------------------

template <class Coeff>
struct ZeroOrderMap {
  TrigSeries<Coeff> x2, y2, xy;
  // Images of 1, cos(2 omega1 t), sin(2 omega1 t) as quadratic forms.
  ConstQuad<Coeff> one, cos_b, sin_b;
  bool fold_null = false;
};

template <class Coeff>
ZeroOrderMap<Coeff> unphased_zero_order_map(const Lattice& lat) {
  using S = TrigSeries<Coeff>;
  const Rational w1 = lat.omega1;
  const Rational w1sq = w1 * w1;
  const Frequency b{0, 2};
  ZeroOrderMap<Coeff> map{S(lat), S(lat), S(lat), {}, {}, {}, false};
  map.x2 = (S::constant(lat, Coeff(Rational(1))) - S::cosine(lat, b)) * Rational(Rational(1) / (2 * w1sq));
  map.y2 = (S::constant(lat, Coeff(Rational(1))) + S::cosine(lat, b)) * Rational(1, 2);
  map.xy = S::sine(lat, b) * Rational(Rational(1) / (2 * w1));
  map.one = {Coeff(w1sq), Coeff(Rational(1)), Coeff(Rational(0))};
  map.cos_b = {Coeff(Rational(-w1sq)), Coeff(Rational(1)), Coeff(Rational(0))};
  map.sin_b = {Coeff(Rational(0)), Coeff(Rational(0)), Coeff(Rational(2 * w1))};
  return map;
}

/// Phased bridge over the generator ring: cos theta = c0 cos B + s0 sin B,
/// sin theta = c0 sin B - s0 cos B with theta = 2 omega1 (t - t0); null
/// frequencies are folded into constants after every substitution.
inline ZeroOrderMap<PhasePoly> phased_zero_order_map(const Lattice& lat) {
  using S = PhaseSeries;
  const Rational w1 = lat.omega1;
  const Rational w1sq = w1 * w1;
  const Frequency b{0, 2};
  const PhasePoly c0 = PhasePoly::c0(), s0 = PhasePoly::s0();
  const S cos_theta = S::cosine(lat, b, c0) + S::sine(lat, b, s0);
  const S sin_theta = S::sine(lat, b, c0) - S::cosine(lat, b, s0);
  const S one = S::constant(lat, PhasePoly(Rational(1)));
  ZeroOrderMap<PhasePoly> map{S(lat), S(lat), S(lat), {}, {}, {}, true};
  map.x2 = (one - cos_theta) * Rational(Rational(1) / (2 * w1sq));
  map.y2 = (one + cos_theta) * Rational(1, 2);
  map.xy = sin_theta * Rational(Rational(1) / (2 * w1));
  const Rational two_w1 = 2 * w1;
  map.one = {PhasePoly(w1sq), PhasePoly(Rational(1)), PhasePoly(Rational(0))};
  // cos B = c0 cos theta - s0 sin theta, sin B = s0 cos theta + c0 sin theta
  map.cos_b = {c0 * Rational(-w1sq), c0, s0 * Rational(-two_w1)};
  map.sin_b = {s0 * Rational(-w1sq), s0, c0 * two_w1};
  return map;
}

/// K = -[f, H1] with H1 = -x^2 cos(omega t), i.e. K = -2x cos(omega t) df/dy.
template <class Coeff>
QuadFormSeries<Coeff> poisson_bracket_with_H1(const QuadFormSeries<Coeff>& f) {
  const Lattice& lat = f.lattice();
  const auto cos_wt = TrigSeries<Coeff>::cosine(lat, {1, 0});
  QuadFormSeries<Coeff> k(lat);
  // df/dy = 2 cyy y + cxy x
  k.cxx = (cos_wt * f.cxy) * Rational(-2);
  k.cxy = (cos_wt * f.cyy) * Rational(-4);
  return k;
}

template <class Coeff>
TrigSeries<Coeff> substitute_zero_order(const QuadFormSeries<Coeff>& f, const ZeroOrderMap<Coeff>& map) {
  TrigSeries<Coeff> out = f.cxx * map.x2 + f.cyy * map.y2 + f.cxy * map.xy;
  return map.fold_null ? out.fold_null_frequencies() : out;
}

inline RationalSeries substitute_zero_order(const QuadFormSeries<Rational>& f) {
  return substitute_zero_order(f, unphased_zero_order_map<Rational>(f.lattice()));
}

/// Inverse of substitute_zero_order: every trig((k omega + m omega1) t) with
/// m in {-2, 0, 2} is split as trig(k omega t +- B) and B is mapped back to
/// phase space. The result only carries multiples of omega.
template <class Coeff>
QuadFormSeries<Coeff> back_substitute(const TrigSeries<Coeff>& s, const ZeroOrderMap<Coeff>& map,
                                      bool secular_allowed) {
  const Lattice& lat = s.lattice();
  QuadFormSeries<Coeff> out(lat);
  auto emit = [&](int p, int k, Phase phase, const Coeff& c, const ConstQuad<Coeff>& image) {
    if (k == 0 && phase == Phase::Sin) return;
    const TermKey key{p, {k, 0}, phase};
    out.cxx.add_term(key, c * image.xx);
    out.cyy.add_term(key, c * image.yy);
    out.cxy.add_term(key, c * image.xy);
  };
  const Coeff zero(Rational(0));
  for (const auto& [key, c] : s.terms()) {
    if (key.p > 0 && !secular_allowed)
      throw SecularTerm("secular term t^" + std::to_string(key.p) + " at frequency (" + std::to_string(key.freq.k) +
                        ", " + std::to_string(key.freq.m) + ")");
    const int k = key.freq.k;
    const int p = key.p;
    switch (key.freq.m) {
      case 0:
        emit(p, k, key.phase, c, map.one);
        break;
      case 2:
      case -2: {
        const bool plus = key.freq.m == 2;
        const Coeff neg = zero - c;
        if (key.phase == Phase::Cos) {
          // cos(A +- B) = cos A cos B -+ sin A sin B
          emit(p, k, Phase::Cos, c, map.cos_b);
          emit(p, k, Phase::Sin, plus ? neg : c, map.sin_b);
        } else {
          // sin(A +- B) = sin A cos B +- cos A sin B
          emit(p, k, Phase::Sin, c, map.cos_b);
          emit(p, k, Phase::Cos, plus ? c : neg, map.sin_b);
        }
        break;
      }
      default:
        throw MalformedSpectrum("term with omega1 multiple m = " + std::to_string(key.freq.m) +
                                " cannot be expressed as a quadratic form");
    }
  }
  return out;
}

inline QuadFormSeries<Rational> back_substitute(const RationalSeries& s, bool secular_allowed = false) {
  return back_substitute(s, unphased_zero_order_map<Rational>(s.lattice()), secular_allowed);
}

/// Runs Phi_{s+1} = backsub( int_0^t subst(-[Phi_s, H1]) dt ) from a seed.
template <class Coeff>
std::vector<QuadFormSeries<Coeff>> run_recursion(const QuadFormSeries<Coeff>& seed, int S,
                                                 const ZeroOrderMap<Coeff>& map, bool secular_allowed) {
  std::vector<QuadFormSeries<Coeff>> orders{seed};
  orders.reserve(static_cast<std::size_t>(S) + 1);
  for (int s = 0; s < S; ++s) {
    const auto k = poisson_bracket_with_H1(orders.back());
    const auto integrated = substitute_zero_order(k, map).integrate_from_zero();
    orders.push_back(back_substitute(integrated, map, secular_allowed));
  }
  return orders;
}

template <class Coeff>
QuadFormSeries<Coeff> h0_form(const Lattice& lat) {
  using S = TrigSeries<Coeff>;
  return {S::constant(lat, Coeff(Rational(lat.omega1 * lat.omega1 / 2))), S::constant(lat, Coeff(Rational(1, 2))),
          S(lat)};
}

template <class Coeff>
QuadFormSeries<Coeff> h1_form(const Lattice& lat) {
  using S = TrigSeries<Coeff>;
  return {S::cosine(lat, {1, 0}, Coeff(Rational(-1))), S(lat), S(lat)};
}

inline constexpr int kDefaultOrder = 10;
inline constexpr int kMaxOrder = 40;

/// Smallest j in [1, jmax] with j omega == 2 omega1, if any.
inline std::optional<int> resonant_harmonic(const SystemParams& p, int jmax) {
  for (int j = 1; j <= jmax; ++j)
    if (Rational(j) * p.omega == 2 * p.omega1) return j;
  return std::nullopt;
}

/// Non-resonant formal integral seeded with H0.
inline RationalIntegral build_integral(const SystemParams& params, int S, Seed seed = Seed::H0) {
  params.validate();
  if (S < 0 || S > kMaxOrder) throw DomainError("order must lie in [0, " + std::to_string(kMaxOrder) + "]");
  if (seed != Seed::H0) throw DomainError("the non-resonant builder only supports seed H0");
  if (auto j = resonant_harmonic(params, S + 1)) throw ResonanceDetected(*j);
  const Lattice lat = params.lattice();
  RationalIntegral phi;
  phi.params = params;
  phi.seed = seed;
  phi.secular_allowed = false;
  phi.orders = run_recursion(h0_form<Rational>(lat), S, unphased_zero_order_map<Rational>(lat), false);
  return phi;
}

/// Double-precision evaluator for a formal integral at fixed binding.
class CompiledIntegral {
 public:
  template <class Coeff>
  explicit CompiledIntegral(const FormalIntegral<Coeff>& phi, const PhaseBinding& bind = {})
      : has_energy_(phi.has_energy_term) {
    for (const auto& q : phi.orders) orders_.emplace_back(q, bind);
  }

  int order() const { return static_cast<int>(orders_.size()) - 1; }

  double operator()(double x, double y, double t, double epsilon, double energy = 0.0) const {
    return evaluate(x, y, t, epsilon, order()) + (has_energy_ ? energy : 0.0);
  }

  /// Value of the series truncated at order S <= order().
  double evaluate(double x, double y, double t, double epsilon, int S) const {
    double sum = 0.0;
    for (int s = S; s >= 0; --s) sum = sum * epsilon + orders_[static_cast<std::size_t>(s)](x, y, t);
    return sum;
  }

  /// Summed coefficients (xx, yy, xy) at time t.
  std::array<double, 3> coefficients(double t, double epsilon) const {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    for (int s = order(); s >= 0; --s) {
      const auto& q = orders_[static_cast<std::size_t>(s)];
      c = {c[0] * epsilon + q.xx(t), c[1] * epsilon + q.yy(t), c[2] * epsilon + q.xy(t)};
    }
    return c;
  }

 private:
  std::vector<CompiledQuadForm> orders_;
  bool has_energy_;
};

template <class Coeff>
double eval_integral(const FormalIntegral<Coeff>& phi, double x, double y, double t, double epsilon,
                     const PhaseBinding& bind = {}) {
  return CompiledIntegral(phi, bind)(x, y, t, epsilon);
}

/// Phi = A x^2 + B y^2 + 2 D xy at a section time.
struct Conic {
  double A = 0.0;
  double B = 0.0;
  double D = 0.0;

  double value(double x, double y) const { return A * x * x + B * y * y + 2.0 * D * x * y; }
  double discriminant() const { return A * B - D * D; }
};

/// Conic of the integral at t = kT (all coefficients are T-periodic, so t = 0).
template <class Coeff>
Conic conic_at_section(const FormalIntegral<Coeff>& phi, double epsilon, const PhaseBinding& bind = {}) {
  const auto c = CompiledIntegral(phi, bind).coefficients(0.0, epsilon);
  return {c[0], c[1], 0.5 * c[2]};
}

/// Exact per-order section coefficients (xx, yy, xy at t = 0).
template <class Coeff>
std::vector<ConstQuad<Coeff>> section_coefficients(const FormalIntegral<Coeff>& phi) {
  std::vector<ConstQuad<Coeff>> out;
  for (const auto& q : phi.orders) out.push_back({q.cxx.value_at_zero(), q.cyy.value_at_zero(), q.cxy.value_at_zero()});
  return out;
}

/// Psi in the extended phase space, obtained from Phi alone: Psi_0 = E,
/// Psi_1 = H1 - Phi_1, Psi_s = -Phi_s (s >= 2), so that Phi + Psi = H + E.
template <class Coeff>
FormalIntegral<Coeff> psi_series(const FormalIntegral<Coeff>& phi) {
  if (phi.seed != Seed::H0) throw DomainError("psi_series needs an integral seeded with H0");
  if (phi.order() < 1) throw DomainError("psi_series needs order >= 1");
  const Lattice lat = phi.params.lattice();
  FormalIntegral<Coeff> psi;
  psi.params = phi.params;
  psi.seed = Seed::E;
  psi.secular_allowed = phi.secular_allowed;
  psi.has_energy_term = true;
  psi.orders.emplace_back(lat);
  psi.orders.push_back(h1_form<Coeff>(lat) - phi.orders[1]);
  for (int s = 2; s <= phi.order(); ++s) psi.orders.push_back(-phi.orders[static_cast<std::size_t>(s)]);
  return psi;
}

}  // namespace mathieu
