#pragma once

#include "mathieu/errors.hpp"
#include "mathieu/integral_builder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace mathieu {

struct Tolerance {
  double rtol = 1e-12;
  double atol = 1e-12;
  std::size_t max_steps = 50'000'000;
};

/// Adaptive Dormand-Prince 5(4) stepper with FSAL. The caller drives it
/// with advance(), which lands exactly on the requested time.
template <std::size_t N>
class DormandPrince {
 public:
  using State = std::array<double, N>;

  explicit DormandPrince(Tolerance tol = {}) : tol_(tol) {}

  template <class Rhs>
  State advance(Rhs&& f, double t, State y, double t_end) {
    if (t == t_end) return y;
    const double dir = t_end > t ? 1.0 : -1.0;
    double h = h_ > 0 ? h_ : initial_step(f, t, y, t_end);
    State k1 = f(t, y);
    while (dir * (t_end - t) > 0) {
      if (++steps_ > tol_.max_steps) throw StepFailure("step budget exhausted");
      bool last = false;
      if (h >= std::abs(t_end - t)) {
        h = std::abs(t_end - t);
        last = true;
      }
      const double hs = dir * h;
      State k2, k3, k4, k5, k6, k7, tmp, y5;
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a21 * k1[i]);
      k2 = f(t + c2 * hs, tmp);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
      k3 = f(t + c3 * hs, tmp);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = f(t + c4 * hs, tmp);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = f(t + c5 * hs, tmp);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      k6 = f(t + hs, tmp);
      for (std::size_t i = 0; i < N; ++i)
        y5[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      const double t_new = last ? t_end : t + hs;
      k7 = f(t_new, y5);
      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = tol_.atol + tol_.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        const double ei = std::abs(e) / sc;
        if (!std::isfinite(ei) || !std::isfinite(y5[i])) err = std::numeric_limits<double>::infinity();
        err = std::max(err, ei);
      }
      if (!std::isfinite(err)) throw StepFailure("non-finite state");
      if (err <= 1.0) {
        t = t_new;
        y = y5;
        k1 = k7;
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (!last) h_ = h * fac;
        else h_ = std::max(h_, h);
        h = h_;
      } else {
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        if (h < 1e-15 * std::max(1.0, std::abs(t))) throw StepFailure("step size underflow at t = " + std::to_string(t));
      }
    }
    return y;
  }

  std::size_t steps() const { return steps_; }

 private:
  template <class Rhs>
  double initial_step(Rhs& f, double t, const State& y, double t_end) const {
    const State d = f(t, y);
    double ny = 0.0, nd = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      ny = std::max(ny, std::abs(y[i]));
      nd = std::max(nd, std::abs(d[i]));
    }
    double h = nd > 0 ? 0.01 * std::max(ny, 1e-6) / nd : 1e-3;
    return std::min({h, std::abs(t_end - t), 1e-2});
  }

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  // b - b*
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  Tolerance tol_;
  double h_ = 0.0;
  std::size_t steps_ = 0;
};

struct PhaseState {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
  double E = 0.0;
};

struct SectionPoint {
  double x = 0.0;
  double y = 0.0;
  double E = 0.0;
  long k = 0;
  double t = 0.0;
  double d = 0.0;
  double r = 0.0;
};

inline double hamiltonian(const SystemParams& p, double x, double y, double t) {
  const double w1 = p.omega1_value();
  return 0.5 * (y * y + w1 * w1 * x * x) - p.epsilon * x * x * std::cos(p.omega_value() * t);
}

/// Right-hand side of the extended system (x, y, E).
struct ExtendedRhs {
  double w, w1sq, eps;
  explicit ExtendedRhs(const SystemParams& p)
      : w(p.omega_value()), w1sq(p.omega1_value() * p.omega1_value()), eps(p.epsilon) {}
  std::array<double, 3> operator()(double t, const std::array<double, 3>& s) const {
    const double c = std::cos(w * t);
    return {s[1], -(w1sq - 2.0 * eps * c) * s[0], -eps * w * s[0] * s[0] * std::sin(w * t)};
  }
};

/// Two copies of the linear (x, y) flow, for the fundamental matrix.
struct LinearPairRhs {
  double w, w1sq, eps;
  explicit LinearPairRhs(const SystemParams& p)
      : w(p.omega_value()), w1sq(p.omega1_value() * p.omega1_value()), eps(p.epsilon) {}
  std::array<double, 4> operator()(double t, const std::array<double, 4>& s) const {
    const double g = w1sq - 2.0 * eps * std::cos(w * t);
    return {s[1], -g * s[0], s[3], -g * s[2]};
  }
};

struct Trajectory {
  SystemParams params;
  int samples_per_period = 1;
  std::vector<PhaseState> states;
  bool stopped_early = false;  // r exceeded the stop radius
};

struct OrbitOptions {
  int samples_per_period = 1;
  double stop_radius = 0.0;  // 0: never stop
  Tolerance tol{};
};

/// Orbit sampled at t = (k + j/samples) T, landing exactly on t = kT.
/// E starts at -H(x0, y0, 0) and obeys dE/dt = -eps omega x^2 sin(omega t).
inline Trajectory integrate_orbit(const SystemParams& params, double x0, double y0, long n_periods,
                                  const OrbitOptions& opt = {}) {
  params.validate();
  if (n_periods < 1) throw DomainError("n_periods must be >= 1");
  if (opt.samples_per_period < 1) throw DomainError("samples_per_period must be >= 1");
  Trajectory out;
  out.params = params;
  out.samples_per_period = opt.samples_per_period;
  const double T = params.period();
  const int spp = opt.samples_per_period;
  ExtendedRhs rhs(params);
  DormandPrince<3> dp(opt.tol);
  std::array<double, 3> s{x0, y0, -hamiltonian(params, x0, y0, 0.0)};
  double t = 0.0;
  out.states.push_back({s[0], s[1], 0.0, s[2]});
  out.states.reserve(static_cast<std::size_t>(n_periods * spp + 1));
  for (long k = 0; k < n_periods; ++k) {
    for (int j = 1; j <= spp; ++j) {
      const double tn = j == spp ? static_cast<double>(k + 1) * T : (static_cast<double>(k) + double(j) / spp) * T;
      s = dp.advance(rhs, t, s, tn);
      t = tn;
      out.states.push_back({s[0], s[1], t, s[2]});
      if (opt.stop_radius > 0 && std::hypot(s[0], s[1]) > opt.stop_radius) {
        out.stopped_early = true;
        return out;
      }
    }
  }
  return out;
}

/// Same, over a time horizon instead of a period count; the last sample sits at t_end.
inline Trajectory integrate_orbit_time(const SystemParams& params, double x0, double y0, double t_end,
                                       const OrbitOptions& opt = {}) {
  if (!(t_end > 0)) throw DomainError("time horizon must be positive");
  const double T = params.period();
  const long n = std::max(1L, static_cast<long>(std::ceil(t_end / T - 1e-12)));
  Trajectory tr = integrate_orbit(params, x0, y0, n, opt);
  while (!tr.states.empty() && tr.states.back().t > t_end * (1 + 1e-14)) tr.states.pop_back();
  if (tr.states.back().t < t_end * (1 - 1e-14) && !tr.stopped_early) {
    ExtendedRhs rhs(params);
    DormandPrince<3> dp(opt.tol);
    const auto& b = tr.states.back();
    auto s = dp.advance(rhs, b.t, std::array<double, 3>{b.x, b.y, b.E}, t_end);
    tr.states.push_back({s[0], s[1], t_end, s[2]});
  }
  return tr;
}

inline SectionPoint make_section_point(const SystemParams& p, const PhaseState& s, long k) {
  const double w1 = p.omega1_value();
  return {s.x, s.y, s.E, k, s.t, std::hypot(w1 * s.x, s.y), std::hypot(s.x, s.y)};
}

/// Subsequence of samples at t = kT.
inline std::vector<SectionPoint> stroboscopic_section(const Trajectory& tr) {
  std::vector<SectionPoint> out;
  const auto spp = static_cast<std::size_t>(tr.samples_per_period);
  const double T = tr.params.period();
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& s = tr.states[i];
    const long k = std::lround(s.t / T);
    if (i % spp == 0 && std::abs(s.t - static_cast<double>(k) * T) <= 1e-12 * T * std::max(1L, k))
      out.push_back(make_section_point(tr.params, s, k));
  }
  return out;
}

inline std::vector<SectionPoint> section_orbit(const SystemParams& params, double x0, double y0, long n_periods,
                                               double stop_radius = 0.0) {
  OrbitOptions opt;
  opt.stop_radius = stop_radius;
  return stroboscopic_section(integrate_orbit(params, x0, y0, n_periods, opt));
}

/// (x, y) flow from t0 to t1 (either direction).
inline std::array<double, 2> flow_map(const SystemParams& params, double x0, double y0, double t0, double t1,
                                      Tolerance tol = {}) {
  LinearPairRhs rhs(params);
  DormandPrince<4> dp(tol);
  auto s = dp.advance(rhs, t0, std::array<double, 4>{x0, y0, 0.0, 0.0}, t1);
  return {s[0], s[1]};
}

struct Monodromy {
  double m11 = 1, m12 = 0, m21 = 0, m22 = 1;
  int n = 1;

  double trace() const { return m11 + m22; }
  double det() const { return m11 * m22 - m12 * m21; }
  std::array<std::complex<double>, 2> eigenvalues() const {
    const double tr = trace();
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det()));
    return {(tr + disc) / 2.0, (tr - disc) / 2.0};
  }
  std::array<double, 2> apply(double x, double y) const { return {m11 * x + m12 * y, m21 * x + m22 * y}; }
};

/// Fundamental matrix of the linear system over [0, nT].
inline Monodromy monodromy(const SystemParams& params, int n = 1, Tolerance tol = {}) {
  params.validate();
  if (n < 1) throw DomainError("n must be >= 1");
  LinearPairRhs rhs(params);
  DormandPrince<4> dp(tol);
  const double T = params.period();
  std::array<double, 4> s{1.0, 0.0, 0.0, 1.0};
  for (int k = 0; k < n; ++k) s = dp.advance(rhs, k * T, s, (k + 1) * T);
  // columns: solution from (1,0) is (s0, s1), from (0,1) is (s2, s3)
  return {s[0], s[2], s[1], s[3], n};
}

struct EscapeReport {
  bool escaped = false;
  std::optional<long> k_escape;
  std::optional<double> growth_rate;
  std::optional<double> r_squared;
  double r_max = 0.0;
};

/// Least-squares slope of log r(kT) against t over the second half of the
/// samples (up to the escape point).
inline EscapeReport escape_diagnostics(const std::vector<SectionPoint>& section, double r_escape = 1e3) {
  if (section.empty()) throw DomainError("empty section");
  EscapeReport rep;
  std::size_t end = section.size();
  for (std::size_t i = 0; i < section.size(); ++i) {
    rep.r_max = std::max(rep.r_max, section[i].r);
    if (!rep.escaped && section[i].r > r_escape) {
      rep.escaped = true;
      rep.k_escape = section[i].k;
      end = i + 1;
    }
  }
  const std::size_t begin = end / 2;
  const std::size_t n = end - begin;
  if (n >= 3) {
    double st = 0, sl = 0, stt = 0, stl = 0, sll = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const double t = section[i].t;
      const double l = std::log(std::max(section[i].r, 1e-300));
      st += t;
      sl += l;
      stt += t * t;
      stl += t * l;
      sll += l * l;
    }
    const double nn = static_cast<double>(n);
    const double vt = stt - st * st / nn, vl = sll - sl * sl / nn, cv = stl - st * sl / nn;
    if (vt > 0) {
      rep.growth_rate = cv / vt;
      rep.r_squared = vl > 0 ? cv * cv / (vt * vl) : 1.0;
    }
  }
  return rep;
}

inline constexpr double kEscapeRadius = 1e3;
inline constexpr long kEscapeHorizon = 500;

}  // namespace mathieu
