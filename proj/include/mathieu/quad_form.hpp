#pragma once

#include "mathieu/trig_series.hpp"

namespace mathieu {

/// Quadratic form cxx(t) x^2 + cyy(t) y^2 + cxy(t) xy with trigonometric
/// series coefficients. One order of a formal integral.
template <class Coeff>
struct QuadFormSeries {
  using Series = TrigSeries<Coeff>;

  Series cxx;
  Series cyy;
  Series cxy;

  explicit QuadFormSeries(const Lattice& lat) : cxx(lat), cyy(lat), cxy(lat) {}
  QuadFormSeries(Series xx, Series yy, Series xy) : cxx(std::move(xx)), cyy(std::move(yy)), cxy(std::move(xy)) {}

  const Lattice& lattice() const { return cxx.lattice(); }
  bool empty() const { return cxx.empty() && cyy.empty() && cxy.empty(); }

  QuadFormSeries& operator+=(const QuadFormSeries& o) {
    cxx += o.cxx;
    cyy += o.cyy;
    cxy += o.cxy;
    return *this;
  }
  QuadFormSeries& operator-=(const QuadFormSeries& o) {
    cxx -= o.cxx;
    cyy -= o.cyy;
    cxy -= o.cxy;
    return *this;
  }
  friend QuadFormSeries operator+(QuadFormSeries a, const QuadFormSeries& b) { return a += b; }
  friend QuadFormSeries operator-(QuadFormSeries a, const QuadFormSeries& b) { return a -= b; }
  friend QuadFormSeries operator-(QuadFormSeries a) { return a.scaled(Coeff(Rational(-1))); }
  friend bool operator==(const QuadFormSeries& a, const QuadFormSeries& b) {
    return a.cxx == b.cxx && a.cyy == b.cyy && a.cxy == b.cxy;
  }

  QuadFormSeries scaled(const Coeff& c) const { return {cxx.scaled(c), cyy.scaled(c), cxy.scaled(c)}; }

  double value(double x, double y, double t, const PhaseBinding& bind = {}) const {
    return cxx.eval(t, bind) * x * x + cyy.eval(t, bind) * y * y + cxy.eval(t, bind) * x * y;
  }

  int max_secular_degree() const {
    return std::max({cxx.max_secular_degree(), cyy.max_secular_degree(), cxy.max_secular_degree()});
  }

  QuadFormSeries secular_part() const { return {cxx.secular_part(), cyy.secular_part(), cxy.secular_part()}; }
};

/// A constant quadratic form with ring coefficients.
template <class Coeff>
struct ConstQuad {
  Coeff xx{Rational(0)};
  Coeff yy{Rational(0)};
  Coeff xy{Rational(0)};
};

/// Double-precision evaluator of one quadratic form.
class CompiledQuadForm {
 public:
  CompiledQuadForm() = default;
  template <class Coeff>
  CompiledQuadForm(const QuadFormSeries<Coeff>& q, const PhaseBinding& bind = {})
      : xx_(q.cxx, bind), yy_(q.cyy, bind), xy_(q.cxy, bind) {}

  double operator()(double x, double y, double t) const { return xx_(t) * x * x + yy_(t) * y * y + xy_(t) * x * y; }
  double xx(double t) const { return xx_(t); }
  double yy(double t) const { return yy_(t); }
  double xy(double t) const { return xy_(t); }

 private:
  CompiledSeries xx_, yy_, xy_;
};

}  // namespace mathieu
