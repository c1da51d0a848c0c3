#pragma once

#include "mathieu/integral_builder.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace mathieu {

// Resonant case omega = 2 omega1. The recursion runs on the phased
// zero-order orbit; the phase t0 only appears through the generators
// c0 = cos(2 omega1 t0), s0 = sin(2 omega1 t0).

using PhaseIntegral = FormalIntegral<PhasePoly>;

inline void require_primary_resonance(const SystemParams& params) {
  params.validate();
  if (params.omega == 2 * params.omega1) return;
  if (auto j = resonant_harmonic(params, 64))
    throw NotImplementedResonance("resonance " + std::to_string(*j) +
                                  " omega = 2 omega1 is not supported; only omega = 2 omega1 is implemented");
  throw NotResonant("omega != 2 omega1");
}

/// C0 = (y^2 - omega1^2 x^2) cos(omega t) + 2 omega1 xy sin(omega t) and its
/// companion S0 = (y^2 - omega1^2 x^2) sin(omega t) - 2 omega1 xy cos(omega t).
/// On the phased zero-order orbit they reduce to 2 Phi0 c0 and 2 Phi0 s0.
inline std::pair<QuadFormSeries<PhasePoly>, QuadFormSeries<PhasePoly>> resonant_seeds(const SystemParams& params) {
  require_primary_resonance(params);
  const Lattice lat = params.lattice();
  using S = PhaseSeries;
  const Rational w1 = params.omega1;
  const PhasePoly one(Rational(1));
  const PhasePoly minus_w1sq(Rational(-(w1 * w1)));
  const PhasePoly two_w1(Rational(2 * w1));
  QuadFormSeries<PhasePoly> c0{S::cosine(lat, {1, 0}, minus_w1sq), S::cosine(lat, {1, 0}, one),
                               S::sine(lat, {1, 0}, two_w1)};
  QuadFormSeries<PhasePoly> s0{S::sine(lat, {1, 0}, minus_w1sq), S::sine(lat, {1, 0}, one),
                               S::cosine(lat, {1, 0}, PhasePoly(Rational(-2 * w1)))};
  return {std::move(c0), std::move(s0)};
}

inline PhaseIntegral build_resonant_series(const SystemParams& params, int S, Seed seed) {
  require_primary_resonance(params);
  if (S < 0 || S > kMaxOrder) throw DomainError("order must lie in [0, " + std::to_string(kMaxOrder) + "]");
  const Lattice lat = params.lattice();
  QuadFormSeries<PhasePoly> start(lat);
  switch (seed) {
    case Seed::H0: start = h0_form<PhasePoly>(lat); break;
    case Seed::C0: start = resonant_seeds(params).first; break;
    case Seed::S0: start = resonant_seeds(params).second; break;
    case Seed::E: throw DomainError("seed E is not a recursion seed");
  }
  PhaseIntegral out;
  out.params = params;
  out.seed = seed;
  out.secular_allowed = true;
  out.orders = run_recursion(start, S, phased_zero_order_map(lat), true);
  return out;
}

/// C-series C0 + eps C1 + ..., secular terms retained.
inline PhaseIntegral build_resonant_C(const SystemParams& params, int S) {
  return build_resonant_series(params, S, Seed::C0);
}

/// Phi-series on the phased zero-order orbit (its Phi_1 carries s0 t).
inline PhaseIntegral build_resonant_phi(const SystemParams& params, int S) {
  return build_resonant_series(params, S, Seed::H0);
}

struct ResonantIntegral {
  PhaseIntegral base;      // C-series
  PhaseIntegral phi;       // phased Phi-series used for mixing
  std::vector<PhasePoly> mix;  // q_1, q_2, ... (polynomials in c0, s0)
  PhaseIntegral combined;  // Cbar = C + sum_i eps^i q_i Phi
};

namespace detail {

// num / den in Q[c0, s0]/(c0^2 + s0^2 - 1) for den = r * s0^b, b in {0, 1}.
// Dividing by s0 uses 1/s0 = s0/(1 - c0^2), so the s0-free part of num must
// be divisible by 1 - c0^2.
inline std::optional<PhasePoly> divide_by_generator_monomial(const PhasePoly& num, const PhasePoly& den) {
  if (den.terms().size() != 1) return std::nullopt;
  const auto& [mono, r] = *den.terms().begin();
  if (mono.c != 0) return std::nullopt;
  const Rational inv = Rational(1) / r;
  if (mono.s == 0) return num * inv;
  // num = N0(c0) + s0 N1(c0)
  std::vector<Rational> n0;
  PhasePoly quotient;
  for (const auto& [m, c] : num.terms()) {
    if (m.s == 1) {
      quotient += PhasePoly::monomial({m.c, 0}, c);
    } else {
      if (n0.size() <= static_cast<std::size_t>(m.c)) n0.resize(static_cast<std::size_t>(m.c) + 1, Rational(0));
      n0[static_cast<std::size_t>(m.c)] = c;
    }
  }
  // N0 / (1 - c0^2) by long division from the top degree
  std::vector<Rational> q0(n0.size(), Rational(0));
  for (std::size_t d = n0.size(); d-- > 2;) {
    if (is_zero(n0[d])) continue;
    const Rational lead = -n0[d];  // divide by -c0^2
    q0[d - 2] = lead;
    n0[d] = 0;
    n0[d - 2] -= lead;
  }
  for (const auto& c : n0)
    if (!is_zero(c)) return std::nullopt;
  for (std::size_t d = 0; d < q0.size(); ++d)
    if (!is_zero(q0[d])) quotient += PhasePoly::monomial({static_cast<int>(d), 1}, q0[d]);
  return quotient * inv;
}

// Solves residual + q * reference == 0 for q in the generator ring.
inline PhasePoly solve_proportional(const QuadFormSeries<PhasePoly>& residual,
                                    const QuadFormSeries<PhasePoly>& reference, int order) {
  if (residual.empty()) return PhasePoly();
  const PhaseSeries* ref_series = nullptr;
  const PhaseSeries* res_series = nullptr;
  for (auto [ref, res] : {std::pair{&reference.cxx, &residual.cxx}, std::pair{&reference.cyy, &residual.cyy},
                          std::pair{&reference.cxy, &residual.cxy}}) {
    if (!ref->empty()) {
      ref_series = ref;
      res_series = res;
      break;
    }
  }
  if (ref_series == nullptr)
    throw UnsolvableSecular("no secular reference term to cancel order " + std::to_string(order));
  const auto& [ref_key, ref_coeff] = *ref_series->terms().begin();
  PhasePoly num;
  if (auto it = res_series->terms().find(ref_key); it != res_series->terms().end()) num = -it->second;
  const auto q = divide_by_generator_monomial(num, ref_coeff);
  if (!q || !(residual + reference.scaled(*q)).empty())
    throw UnsolvableSecular("secular part at order " + std::to_string(order) +
                            " is not proportional to the secular part of Phi_1");
  return *q;
}

}  // namespace detail

/// Mixes eps^i q_i Phi into the C-series so that the secular terms cancel
/// order by order. Both inputs must extend to order S + 1; the combination
/// is returned through order S.
inline ResonantIntegral eliminate_secular(const PhaseIntegral& C, const PhaseIntegral& phi, int S) {
  if (C.order() < S + 1 || phi.order() < S + 1)
    throw DomainError("eliminate_secular needs C and Phi built to order S + 1");
  if (!(C.params.omega == phi.params.omega && C.params.omega1 == phi.params.omega1))
    throw DomainError("C and Phi built over different parameters");
  auto order_of = [](const PhaseIntegral& f, int n) -> const QuadFormSeries<PhasePoly>& {
    return f.orders[static_cast<std::size_t>(n)];
  };
  const auto phi1_secular = order_of(phi, 1).secular_part();

  std::vector<PhasePoly> q(static_cast<std::size_t>(S) + 1);  // q[0] unused
  // combined_n = C_n + sum_{i=1}^{n} q_i Phi_{n-i}
  auto combination = [&](int n, bool include_qn) {
    QuadFormSeries<PhasePoly> acc = order_of(C, n);
    for (int i = 1; i <= n; ++i) {
      if (i == n && !include_qn) continue;
      const PhasePoly& qi = q[static_cast<std::size_t>(i)];
      if (!qi.is_zero()) acc += order_of(phi, n - i).scaled(qi);
    }
    return acc;
  };
  for (int n = 1; n <= S; ++n) {
    // q_n is fixed by order n + 1, where it multiplies Phi_1.
    const auto residual = combination(n + 1, false).secular_part();
    q[static_cast<std::size_t>(n)] = detail::solve_proportional(residual, phi1_secular, n + 1);
  }

  ResonantIntegral out;
  out.base = C;
  out.phi = phi;
  out.mix.assign(q.begin() + 1, q.end());
  out.combined.params = C.params;
  out.combined.seed = Seed::C0;
  out.combined.secular_allowed = false;
  for (int n = 0; n <= S; ++n) {
    auto combined = combination(n, true);
    if (combined.max_secular_degree() > 0)
      throw UnsolvableSecular("secular term survives at order " + std::to_string(n));
    out.combined.orders.push_back(std::move(combined));
  }
  return out;
}

/// Builds C and Phi to order S + 1 and eliminates the secular terms.
inline ResonantIntegral build_resonant_integral(const SystemParams& params, int S) {
  return eliminate_secular(build_resonant_C(params, S + 1), build_resonant_phi(params, S + 1), S);
}

/// Quadratic form of Cbar at t = kT with the generators bound numerically.
inline Conic resonant_section_form(const ResonantIntegral& R, double epsilon, const PhaseBinding& bind) {
  if (R.combined.order() < 1) throw DomainError("resonant_section_form needs order >= 1");
  return conic_at_section(R.combined, epsilon, bind);
}

}  // namespace mathieu
