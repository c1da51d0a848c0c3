#pragma once

#include "mathieu/rational.hpp"

#include <cmath>
#include <compare>
#include <map>
#include <string>

namespace mathieu {

/// Numeric values bound to the phase generators c0 = cos(2*omega1*t0) and
/// s0 = sin(2*omega1*t0) of a phased zero-order orbit.
struct PhaseBinding {
  double c0 = 1.0;
  double s0 = 0.0;

  /// Binding read off an initial condition (x0, y0) at t = 0 for the phased
  /// solution x = sqrt(2 Phi0)/omega1 sin(omega1 (t - t0)).
  static PhaseBinding from_initial_condition(double x0, double y0, double omega1) {
    const double two_phi0 = y0 * y0 + omega1 * omega1 * x0 * x0;
    if (two_phi0 == 0.0) return {};
    return {(y0 * y0 - omega1 * omega1 * x0 * x0) / two_phi0, -2.0 * omega1 * x0 * y0 / two_phi0};
  }
};

/// Monomial c0^c * s0^s. Reduced form keeps s in {0, 1}.
struct PhaseMonomial {
  int c = 0;
  int s = 0;
  auto operator<=>(const PhaseMonomial&) const = default;
};

/// Polynomial in the generators c0, s0 over the rationals, reduced modulo
/// c0^2 + s0^2 = 1 (every s0^2 is rewritten as 1 - c0^2).
class PhasePoly {
 public:
  PhasePoly() = default;
  PhasePoly(const Rational& constant) {  // NOLINT(google-explicit-constructor)
    if (!mathieu::is_zero(constant)) terms_[{0, 0}] = constant;
  }
  PhasePoly(long constant) : PhasePoly(Rational(constant)) {}  // NOLINT

  static PhasePoly c0() { return monomial({1, 0}, Rational(1)); }
  static PhasePoly s0() { return monomial({0, 1}, Rational(1)); }
  static PhasePoly monomial(PhaseMonomial mono, const Rational& coeff) {
    PhasePoly p;
    p.accumulate(mono, coeff);
    return p;
  }

  const std::map<PhaseMonomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == PhaseMonomial{}); }
  Rational constant_term() const {
    auto it = terms_.find({});
    return it == terms_.end() ? Rational(0) : it->second;
  }

  PhasePoly& operator+=(const PhasePoly& other) {
    for (const auto& [mono, coeff] : other.terms_) accumulate(mono, coeff);
    return *this;
  }
  PhasePoly& operator-=(const PhasePoly& other) {
    for (const auto& [mono, coeff] : other.terms_) accumulate(mono, -coeff);
    return *this;
  }
  PhasePoly& operator*=(const Rational& scalar) {
    if (mathieu::is_zero(scalar)) {
      terms_.clear();
      return *this;
    }
    for (auto& [mono, coeff] : terms_) coeff *= scalar;
    return *this;
  }

  friend PhasePoly operator+(PhasePoly a, const PhasePoly& b) { return a += b; }
  friend PhasePoly operator-(PhasePoly a, const PhasePoly& b) { return a -= b; }
  friend PhasePoly operator-(PhasePoly a) { return a *= Rational(-1); }
  friend PhasePoly operator*(PhasePoly a, const Rational& s) { return a *= s; }
  friend PhasePoly operator*(const Rational& s, PhasePoly a) { return a *= s; }
  friend PhasePoly operator*(const PhasePoly& a, const PhasePoly& b) {
    PhasePoly out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.accumulate({ma.c + mb.c, ma.s + mb.s}, ca * cb);
    return out;
  }
  friend bool operator==(const PhasePoly& a, const PhasePoly& b) { return a.terms_ == b.terms_; }

  double value(const PhaseBinding& bind) const {
    double sum = 0.0;
    for (const auto& [mono, coeff] : terms_)
      sum += to_double(coeff) * std::pow(bind.c0, mono.c) * (mono.s ? bind.s0 : 1.0);
    return sum;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [mono, coeff] : terms_) {
      if (!out.empty()) out += " + ";
      out += "(" + to_string(coeff) + ")";
      if (mono.c == 1) out += "*c0";
      if (mono.c > 1) out += "*c0^" + std::to_string(mono.c);
      if (mono.s) out += "*s0";
    }
    return out;
  }

 private:
  void accumulate(PhaseMonomial mono, const Rational& coeff) {
    if (mathieu::is_zero(coeff)) return;
    while (mono.s >= 2) {
      // s0^2 = 1 - c0^2
      accumulate({mono.c + 2, mono.s - 2}, -coeff);
      mono.s -= 2;
    }
    auto [it, inserted] = terms_.try_emplace(mono, coeff);
    if (!inserted) {
      it->second += coeff;
      if (mathieu::is_zero(it->second)) terms_.erase(it);
    }
  }

  std::map<PhaseMonomial, Rational> terms_;
};

inline bool is_zero(const PhasePoly& p) { return p.is_zero(); }

// Uniform access used by the templated series code.
inline double coeff_value(const Rational& c, const PhaseBinding&) { return to_double(c); }
inline double coeff_value(const PhasePoly& c, const PhaseBinding& bind) { return c.value(bind); }

}  // namespace mathieu
