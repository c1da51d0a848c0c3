#pragma once

#include "mathieu/phase_poly.hpp"
#include "mathieu/rational.hpp"

#include <cmath>
#include <compare>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mathieu {

enum class Phase : unsigned char { Cos, Sin };

/// Lattice frequency k*omega + m*omega1. Canonical sign: k > 0, or k == 0
/// and m >= 0. Frequencies are never collapsed to their numeric value.
struct Frequency {
  int k = 0;
  int m = 0;

  bool is_canonical() const { return k > 0 || (k == 0 && m >= 0); }
  bool is_zero() const { return k == 0 && m == 0; }
  Frequency negated() const { return {-k, -m}; }
  auto operator<=>(const Frequency&) const = default;
};

/// Key of one trigonometric monomial t^p * cos|sin((k omega + m omega1) t).
struct TermKey {
  int p = 0;
  Frequency freq;
  Phase phase = Phase::Cos;
  auto operator<=>(const TermKey&) const = default;
};

/// The rational frequency pair (omega, omega1) a series lives over.
struct Lattice {
  Rational omega;
  Rational omega1;

  Rational nu(Frequency f) const { return Rational(f.k) * omega + Rational(f.m) * omega1; }
  friend bool operator==(const Lattice&, const Lattice&) = default;
};

/// Finite sum of c * t^p * trig((k omega + m omega1) t), kept in canonical
/// form: frequencies with canonical sign, no sin(0), no zero coefficients,
/// no repeated keys. `Coeff` is Rational or PhasePoly.
template <class Coeff>
class TrigSeries {
 public:
  using coeff_type = Coeff;
  using TermMap = std::map<TermKey, Coeff>;

  explicit TrigSeries(Lattice lattice) : lattice_(std::move(lattice)) {}

  static TrigSeries constant(const Lattice& lat, const Coeff& c) {
    TrigSeries s(lat);
    s.add_term({0, {0, 0}, Phase::Cos}, c);
    return s;
  }
  static TrigSeries cosine(const Lattice& lat, Frequency f, const Coeff& c = Coeff(Rational(1)), int p = 0) {
    TrigSeries s(lat);
    s.add_term({p, f, Phase::Cos}, c);
    return s;
  }
  static TrigSeries sine(const Lattice& lat, Frequency f, const Coeff& c = Coeff(Rational(1)), int p = 0) {
    TrigSeries s(lat);
    s.add_term({p, f, Phase::Sin}, c);
    return s;
  }

  const Lattice& lattice() const { return lattice_; }
  const TermMap& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Adds c * t^p * trig(freq t), normalising the frequency sign and merging
  /// with an existing term of the same key.
  void add_term(TermKey key, const Coeff& c) {
    if (is_zero(c)) return;
    Coeff value = c;
    if (!key.freq.is_canonical()) {
      key.freq = key.freq.negated();
      if (key.phase == Phase::Sin) value = Coeff(Rational(0)) - value;
    }
    if (key.freq.is_zero() && key.phase == Phase::Sin) return;
    auto [it, inserted] = terms_.try_emplace(key, value);
    if (!inserted) {
      it->second = it->second + value;
      if (is_zero(it->second)) terms_.erase(it);
    }
  }

  /// Rebuilds the series term by term through add_term.
  TrigSeries canonicalized() const {
    TrigSeries out(lattice_);
    for (const auto& [key, c] : terms_) out.add_term(key, c);
    return out;
  }

  TrigSeries& operator+=(const TrigSeries& other) {
    require_same_lattice(other);
    for (const auto& [key, c] : other.terms_) add_term(key, c);
    return *this;
  }
  TrigSeries& operator-=(const TrigSeries& other) {
    require_same_lattice(other);
    for (const auto& [key, c] : other.terms_) add_term(key, Coeff(Rational(0)) - c);
    return *this;
  }
  TrigSeries& operator*=(const Rational& scalar) {
    if (mathieu::is_zero(scalar)) {
      terms_.clear();
      return *this;
    }
    for (auto& [key, c] : terms_) c = c * scalar;
    return *this;
  }

  friend TrigSeries operator+(TrigSeries a, const TrigSeries& b) { return a += b; }
  friend TrigSeries operator-(TrigSeries a, const TrigSeries& b) { return a -= b; }
  friend TrigSeries operator-(TrigSeries a) { return a *= Rational(-1); }
  friend TrigSeries operator*(TrigSeries a, const Rational& s) { return a *= s; }
  friend TrigSeries operator*(const Rational& s, TrigSeries a) { return a *= s; }

  /// Multiplication by a coefficient-ring element (e.g. a phase generator).
  TrigSeries scaled(const Coeff& c) const {
    TrigSeries out(lattice_);
    for (const auto& [key, v] : terms_) out.add_term(key, v * c);
    return out;
  }

  /// Product expanded with the product-to-sum identities; secular degrees add.
  friend TrigSeries operator*(const TrigSeries& a, const TrigSeries& b) {
    a.require_same_lattice(b);
    TrigSeries out(a.lattice_);
    const Rational half(1, 2);
    for (const auto& [ka, ca] : a.terms_) {
      for (const auto& [kb, cb] : b.terms_) {
        const Coeff c = ca * cb * half;
        const int p = ka.p + kb.p;
        const Frequency sum{ka.freq.k + kb.freq.k, ka.freq.m + kb.freq.m};
        const Frequency diff{ka.freq.k - kb.freq.k, ka.freq.m - kb.freq.m};
        const Coeff neg = Coeff(Rational(0)) - c;
        if (ka.phase == Phase::Cos && kb.phase == Phase::Cos) {
          out.add_term({p, sum, Phase::Cos}, c);
          out.add_term({p, diff, Phase::Cos}, c);
        } else if (ka.phase == Phase::Sin && kb.phase == Phase::Sin) {
          out.add_term({p, diff, Phase::Cos}, c);
          out.add_term({p, sum, Phase::Cos}, neg);
        } else if (ka.phase == Phase::Sin) {  // sin a cos b
          out.add_term({p, sum, Phase::Sin}, c);
          out.add_term({p, diff, Phase::Sin}, c);
        } else {  // cos a sin b
          out.add_term({p, sum, Phase::Sin}, c);
          out.add_term({p, diff, Phase::Sin}, neg);
        }
      }
    }
    return out;
  }

  friend bool operator==(const TrigSeries& a, const TrigSeries& b) {
    return a.lattice_ == b.lattice_ && a.terms_ == b.terms_;
  }

  /// Exact time derivative.
  TrigSeries derivative() const {
    TrigSeries out(lattice_);
    for (const auto& [key, c] : terms_) {
      if (key.p > 0) out.add_term({key.p - 1, key.freq, key.phase}, c * Rational(key.p));
      const Rational nu = lattice_.nu(key.freq);
      if (mathieu::is_zero(nu)) continue;
      if (key.phase == Phase::Cos)
        out.add_term({key.p, key.freq, Phase::Sin}, c * Rational(-nu));
      else
        out.add_term({key.p, key.freq, Phase::Cos}, c * nu);
    }
    return out;
  }

  /// Antiderivative F with F(0) = 0. Zero-frequency cosines (exact test
  /// k omega + m omega1 == 0) raise the secular degree; everything else
  /// integrates by parts into sin(nu t)/nu and (1 - cos(nu t))/nu forms.
  TrigSeries integrate_from_zero() const {
    TrigSeries out(lattice_);
    for (const auto& [key, c] : terms_) {
      const Rational nu = lattice_.nu(key.freq);
      if (mathieu::is_zero(nu)) {
        // sin of a null frequency vanishes identically
        if (key.phase == Phase::Cos) out.add_term({key.p + 1, key.freq, Phase::Cos}, c * Rational(1, key.p + 1));
        continue;
      }
      out += integrate_power_trig(key.p, key.freq, key.phase, nu).scaled(c);
    }
    return out;
  }

  /// Merges every null-frequency term (nu == 0 but (k, m) != (0, 0)) into
  /// the constant: cos -> 1, sin -> 0. Only meaningful on resonant lattices.
  TrigSeries fold_null_frequencies() const {
    TrigSeries out(lattice_);
    for (const auto& [key, c] : terms_) {
      if (!key.freq.is_zero() && mathieu::is_zero(lattice_.nu(key.freq))) {
        if (key.phase == Phase::Cos) out.add_term({key.p, {0, 0}, Phase::Cos}, c);
        continue;
      }
      out.add_term(key, c);
    }
    return out;
  }

  /// Exact value at t = 0 (only p = 0 cosines survive).
  Coeff value_at_zero() const {
    Coeff sum(Rational(0));
    for (const auto& [key, c] : terms_)
      if (key.p == 0 && key.phase == Phase::Cos) sum = sum + c;
    return sum;
  }

  double eval(double t, const PhaseBinding& bind = {}) const {
    const double w = to_double(lattice_.omega);
    const double w1 = to_double(lattice_.omega1);
    double sum = 0.0;
    for (const auto& [key, c] : terms_) {
      const double arg = (key.freq.k * w + key.freq.m * w1) * t;
      const double trig = key.phase == Phase::Cos ? std::cos(arg) : std::sin(arg);
      sum += coeff_value(c, bind) * std::pow(t, key.p) * trig;
    }
    return sum;
  }

  int max_secular_degree() const {
    int p = 0;
    for (const auto& [key, c] : terms_) p = std::max(p, key.p);
    return p;
  }

  /// Part of the series with secular degree >= 1.
  TrigSeries secular_part() const {
    TrigSeries out(lattice_);
    for (const auto& [key, c] : terms_)
      if (key.p > 0) out.terms_.emplace(key, c);
    return out;
  }

 private:
  void require_same_lattice(const TrigSeries& other) const {
    if (!(lattice_ == other.lattice_)) throw std::invalid_argument("TrigSeries over different (omega, omega1)");
  }

  // int_0^t s^p trig(nu s) ds for nu != 0, by the integration-by-parts
  // recurrence
  //   I_p^cos = t^p sin(nu t)/nu - (p/nu) I_{p-1}^sin
  //   I_p^sin = -t^p cos(nu t)/nu + (p/nu) I_{p-1}^cos
  TrigSeries integrate_power_trig(int p, Frequency f, Phase phase, const Rational& nu) const {
    const Rational inv = Rational(1) / nu;
    TrigSeries out(lattice_);
    if (p == 0) {
      if (phase == Phase::Cos) {
        out.add_term({0, f, Phase::Sin}, Coeff(inv));
      } else {
        out.add_term({0, {0, 0}, Phase::Cos}, Coeff(inv));
        out.add_term({0, f, Phase::Cos}, Coeff(Rational(-inv)));
      }
      return out;
    }
    const Rational ratio = Rational(p) * inv;
    if (phase == Phase::Cos) {
      out.add_term({p, f, Phase::Sin}, Coeff(inv));
      out -= integrate_power_trig(p - 1, f, Phase::Sin, nu) * ratio;
    } else {
      out.add_term({p, f, Phase::Cos}, Coeff(Rational(-inv)));
      out += integrate_power_trig(p - 1, f, Phase::Cos, nu) * ratio;
    }
    return out;
  }

  Lattice lattice_;
  TermMap terms_;
};

using RationalSeries = TrigSeries<Rational>;
using PhaseSeries = TrigSeries<PhasePoly>;

/// Flattened double-precision copy of a series for fast repeated evaluation.
class CompiledSeries {
 public:
  CompiledSeries() = default;
  template <class Coeff>
  CompiledSeries(const TrigSeries<Coeff>& s, const PhaseBinding& bind = {}) {
    const double w = to_double(s.lattice().omega);
    const double w1 = to_double(s.lattice().omega1);
    for (const auto& [key, c] : s.terms()) {
      const double v = coeff_value(c, bind);
      if (v == 0.0) continue;
      terms_.push_back({key.p, key.freq.k * w + key.freq.m * w1, key.phase == Phase::Cos, v});
    }
  }

  double operator()(double t) const {
    double sum = 0.0;
    for (const auto& term : terms_) {
      const double arg = term.nu * t;
      const double trig = term.is_cos ? std::cos(arg) : std::sin(arg);
      sum += term.coeff * (term.p == 0 ? 1.0 : std::pow(t, term.p)) * trig;
    }
    return sum;
  }

 private:
  struct Term {
    int p;
    double nu;
    bool is_cos;
    double coeff;
  };
  std::vector<Term> terms_;
};

}  // namespace mathieu
