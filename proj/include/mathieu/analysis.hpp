#pragma once

#include "mathieu/dynamics.hpp"
#include "mathieu/integral_builder.hpp"
#include "mathieu/resonant_builder.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace mathieu {

// ---- critical epsilon ----

enum class Oracle { Trace, Escape };

inline std::string to_string(Oracle o) { return o == Oracle::Trace ? "TRACE" : "ESCAPE"; }

struct CriticalEpsResult {
  double eps_crit = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  Oracle oracle = Oracle::Trace;
  int iterations = 0;
  // escape cross-check at eps_crit -/+ 1e-3 (trace oracle only)
  std::optional<bool> bounded_below;
  std::optional<bool> escaped_above;
};

struct CriticalEpsOptions {
  double scan_step = 0.01;
  double eps_max = 10.0;
  double width = 1e-10;
  bool cross_check = true;
  double check_offset = 1e-3;
  long horizon = kEscapeHorizon;
  // the escape oracle overshoots by the time growth needs to show up, so it
  // runs longer than the cross-check
  long escape_horizon = 3000;
  double escape_width = 1e-6;
  double r_escape = kEscapeRadius;
};

inline double trace_margin(SystemParams p, double eps) {
  p.epsilon = eps;
  return std::abs(monodromy(p, 1).trace()) - 2.0;
}

inline bool escapes(SystemParams p, double eps, long horizon, double r_escape, double x0 = 0.0, double y0 = 1.0) {
  p.epsilon = eps;
  const auto sec = section_orbit(p, x0, y0, horizon, r_escape);
  return escape_diagnostics(sec, r_escape).escaped;
}

namespace detail {

// First sign change of pred (false -> true) scanning sign * [0, eps_max].
template <class Pred>
CriticalEpsResult bisect_boundary(Pred&& unstable, int sign, const CriticalEpsOptions& opt, Oracle oracle) {
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  double lo = 0.0, hi = 0.0;
  bool found = false;
  const long n = std::lround(opt.eps_max / opt.scan_step);
  for (long i = 1; i <= n; ++i) {
    const double e = opt.scan_step * static_cast<double>(i);
    if (unstable(sign * e)) {
      hi = e;
      found = true;
      break;
    }
    lo = e;
  }
  if (!found) throw BracketFailure("no stability change found up to |eps| = " + std::to_string(opt.eps_max));
  CriticalEpsResult res;
  res.oracle = oracle;
  while (hi - lo > opt.width) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (unstable(sign * mid) ? hi : lo) = mid;
    ++res.iterations;
  }
  res.eps_crit = sign * 0.5 * (lo + hi);
  res.lo = sign > 0 ? lo : -hi;
  res.hi = sign > 0 ? hi : -lo;
  return res;
}

}  // namespace detail

/// Boundary |tr M(eps)| = 2 nearest to zero on the side given by sign.
inline CriticalEpsResult critical_epsilon(const SystemParams& params, int sign = 1, Oracle oracle = Oracle::Trace,
                                          const CriticalEpsOptions& opt = {}) {
  params.validate();
  if (oracle == Oracle::Trace) {
    auto res = detail::bisect_boundary([&](double e) { return trace_margin(params, e) > 0; }, sign, opt, oracle);
    if (opt.cross_check) {
      const double e = std::abs(res.eps_crit);
      res.bounded_below = !escapes(params, sign * (e - opt.check_offset), opt.horizon, opt.r_escape);
      res.escaped_above = escapes(params, sign * (e + opt.check_offset), opt.horizon, opt.r_escape);
    }
    return res;
  }
  CriticalEpsOptions o = opt;
  o.width = std::max(opt.width, opt.escape_width);
  return detail::bisect_boundary([&](double e) { return escapes(params, e, o.escape_horizon, o.r_escape); }, sign, o,
                                 oracle);
}

// ---- convergence ----

struct ConvergenceReport {
  std::vector<int> orders;
  std::vector<double> residuals;
  double epsilon = 0.0;
  long periods = 0;
};

/// Relative deviation of the truncated Phi at section points:
/// max_k |Phi_S(x_k, y_k, kT) - Phi_S(x0, y0, 0)| / |Phi_S(x0, y0, 0)|.
inline double section_residual(const CompiledIntegral& phi, int S, double epsilon,
                               const std::vector<SectionPoint>& section, double x0, double y0) {
  const double ref = phi.evaluate(x0, y0, 0.0, epsilon, S);
  double worst = 0.0;
  for (const auto& p : section) worst = std::max(worst, std::abs(phi.evaluate(p.x, p.y, p.t, epsilon, S) - ref));
  return worst / std::abs(ref);
}

inline ConvergenceReport convergence_study(const SystemParams& params, double epsilon, const std::vector<int>& orders,
                                           long n_periods, double x0 = 0.0, double y0 = 1.0) {
  if (orders.empty()) throw DomainError("no orders given");
  for (std::size_t i = 1; i < orders.size(); ++i)
    if (orders[i] <= orders[i - 1]) throw DomainError("orders must be ascending");
  const auto phi = build_integral(params, orders.back());
  const CompiledIntegral compiled(phi);
  SystemParams p = params;
  p.epsilon = epsilon;
  const auto section = section_orbit(p, x0, y0, n_periods, kEscapeRadius);
  if (escape_diagnostics(section).escaped) throw Unbounded("orbit escapes; convergence study needs a bounded orbit");
  ConvergenceReport rep{orders, {}, epsilon, n_periods};
  for (int S : orders) rep.residuals.push_back(section_residual(compiled, S, epsilon, section, x0, y0));
  return rep;
}

// ---- cover count ----

/// Points needed to go once around the invariant curve. The section conic
/// is centrally symmetric and consecutive points land near opposite sides,
/// so the winding is measured on the doubled polar angle in the
/// (omega1 x, y) plane; each step is wrapped to (-pi, pi].
inline int cover_count(const std::vector<SectionPoint>& section, double omega1, double r_escape = kEscapeRadius) {
  if (section.size() < 3) throw DomainError("cover_count needs at least 3 section points");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double total = 0.0;
  double prev = 2.0 * std::atan2(section[0].y, omega1 * section[0].x);
  for (std::size_t i = 1; i < section.size(); ++i) {
    if (section[i].r > r_escape) throw Unbounded("section escapes before covering the curve");
    const double cur = 2.0 * std::atan2(section[i].y, omega1 * section[i].x);
    double d = std::remainder(cur - prev, two_pi);
    if (d <= -std::numbers::pi) d += two_pi;
    total += std::abs(d);
    prev = cur;
    if (total >= two_pi * (1 - 1e-12)) return static_cast<int>(i);
  }
  throw DomainError("section too short to cover the curve");
}

// ---- periodic orbits ----

/// |(x, y)(nT) - (x0, y0)| in the (omega1 x, y) metric.
inline double return_distance(const SystemParams& params, double x0, double y0, int n) {
  const auto f = flow_map(params, x0, y0, 0.0, n * params.period());
  const double w1 = params.omega1_value();
  return std::hypot(w1 * (f[0] - x0), f[1] - y0);
}

/// Rotation angle of the one-period map, arccos(tr/2); NaN outside the stable band.
inline double rotation_angle(SystemParams p, double eps) {
  p.epsilon = eps;
  const double h = monodromy(p, 1).trace() / 2.0;
  return std::abs(h) <= 1.0 ? std::acos(h) : std::nan("");
}

struct PeriodicOrbit {
  double epsilon = 0.0;
  int n = 0;
  int j = 0;  // n alpha = 2 pi j
  double return_distance = 0.0;
};

/// For the linear map M^n = I exactly when n alpha(eps) = 2 pi j, so the
/// refinement solves alpha(eps) = 2 pi j / n near eps_guess by bisection.
inline PeriodicOrbit find_periodic_orbit(const SystemParams& params, double eps_guess, int n, double x0 = 0.0,
                                         double y0 = 1.0, double search = 0.05) {
  if (n < 1) throw DomainError("n must be >= 1");
  const double a0 = rotation_angle(params, eps_guess);
  if (std::isnan(a0)) throw NoRoot("eps_guess lies outside the stable band");
  const int j = static_cast<int>(std::lround(n * a0 / (2.0 * std::numbers::pi)));
  const double target = 2.0 * std::numbers::pi * j / n;
  auto g = [&](double e) { return rotation_angle(params, e) - target; };
  PeriodicOrbit out{eps_guess, n, j, 0.0};
  SystemParams p = params;
  p.epsilon = eps_guess;
  // alpha is flat where the trace is even in eps (eps = 0), so check the guess first
  if (return_distance(p, x0, y0, n) > 1e-10 && g(eps_guess) != 0.0) {
    // expand outwards until a sign change
    const double step = search / 50.0;
    std::optional<std::pair<double, double>> bracket;
    for (int i = 1; i <= 50 && !bracket; ++i) {
      for (double dir : {1.0, -1.0}) {
        const double a = eps_guess + dir * (i - 1) * step, b = eps_guess + dir * i * step;
        const double ga = g(a), gb = g(b);
        if (std::isnan(ga) || std::isnan(gb)) continue;
        if ((ga <= 0) != (gb <= 0)) {
          bracket = std::pair{std::min(a, b), std::max(a, b)};
          break;
        }
      }
    }
    if (!bracket) throw NoRoot("no periodic epsilon within " + std::to_string(search) + " of the guess");
    auto [lo, hi] = *bracket;
    const bool lo_neg = g(lo) <= 0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      ((g(mid) <= 0) == lo_neg ? lo : hi) = mid;
    }
    out.epsilon = 0.5 * (lo + hi);
  }
  p.epsilon = out.epsilon;
  out.return_distance = return_distance(p, x0, y0, n);
  return out;
}

/// Smallest n <= n_max whose return distance is below tol.
inline std::optional<int> detect_period(const SystemParams& params, double x0, double y0, int n_max, double tol) {
  const double w1 = params.omega1_value();
  const double T = params.period();
  LinearPairRhs rhs(params);
  DormandPrince<4> dp;
  std::array<double, 4> s{x0, y0, 0.0, 0.0};
  for (int n = 1; n <= n_max; ++n) {
    s = dp.advance(rhs, (n - 1) * T, s, n * T);
    if (std::hypot(w1 * (s[0] - x0), s[1] - y0) <= tol) return n;
  }
  return std::nullopt;
}

// ---- invariant curves ----

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  int branch = 0;
};

/// Samples of {A x^2 + B y^2 + 2 D xy = level}: one closed ellipse, or both
/// branches of a hyperbola (parameter |s| <= s_max).
inline std::vector<CurvePoint> invariant_curve_points(const Conic& c, double level, int n_samples,
                                                      double s_max = 2.5) {
  if (n_samples < 2) throw DomainError("n_samples must be >= 2");
  const double disc = c.discriminant();
  if (std::abs(disc) <= 1e-12) throw DegenerateConic("A B - D^2 vanishes");
  // principal axes of [[A, D], [D, B]]
  const double phi = 0.5 * std::atan2(2.0 * c.D, c.A - c.B);
  const double cs = std::cos(phi), sn = std::sin(phi);
  const double l1 = c.A * cs * cs + 2.0 * c.D * cs * sn + c.B * sn * sn;
  const double l2 = c.A * sn * sn - 2.0 * c.D * cs * sn + c.B * cs * cs;
  auto rotate = [&](double u, double v, int branch) { return CurvePoint{cs * u - sn * v, sn * u + cs * v, branch}; };
  std::vector<CurvePoint> out;
  if (disc > 0) {
    if (level / l1 <= 0) throw DegenerateConic("level set of a definite form is empty");
    const double a = std::sqrt(level / l1), b = std::sqrt(level / l2);
    for (int i = 0; i < n_samples; ++i) {
      const double th = 2.0 * std::numbers::pi * i / n_samples;
      out.push_back(rotate(a * std::cos(th), b * std::sin(th), 0));
    }
    return out;
  }
  // l1 l2 < 0: the axis whose eigenvalue has the sign of level carries cosh
  const bool first = level / l1 > 0;
  const double la = first ? l1 : l2, lb = first ? l2 : l1;
  const double a = std::sqrt(level / la), b = std::sqrt(-level / lb);
  for (int branch = 0; branch < 2; ++branch) {
    const double sg = branch == 0 ? 1.0 : -1.0;
    for (int i = 0; i < n_samples; ++i) {
      const double s = -s_max + 2.0 * s_max * i / (n_samples - 1);
      const double u = sg * a * std::cosh(s), v = b * std::sinh(s);
      out.push_back(first ? rotate(u, v, branch) : rotate(v, u, branch));
    }
  }
  return out;
}

/// Distance from (x, y) to the level set in the (omega1 x, y) metric. Uses the
/// radial projection when the ray meets the curve, else the nearest sample.
inline double distance_to_curve(const Conic& c, double level, double x, double y, double omega1,
                                const std::vector<CurvePoint>& samples = {}) {
  const double q = c.value(x, y);
  if (q != 0.0 && level / q > 0) {
    const double s = std::sqrt(level / q);
    return std::abs(1.0 - s) * std::hypot(omega1 * x, y);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : samples) best = std::min(best, std::hypot(omega1 * (p.x - x), p.y - y));
  return best;
}

/// x-semiaxis of the section conic through (x0, y0): sqrt(level / A) for D = 0.
inline double section_x_semiaxis(const Conic& c, double level) {
  if (c.A == 0.0 || level / c.A <= 0) throw DegenerateConic("no real x-intercept");
  return std::sqrt(level / c.A);
}

/// x-semiaxis from the built integral at the section through (x0, y0).
inline double section_x_semiaxis(const RationalIntegral& phi, double epsilon, double x0 = 0.0, double y0 = 1.0) {
  const Conic c = conic_at_section(phi, epsilon);
  return section_x_semiaxis(c, c.value(x0, y0));
}

// ---- resonant sections ----

struct ResonantSectionReport {
  Conic conic;
  double level = 0.0;
  double residual = 0.0;  // relative, over the section points
  PhaseBinding binding;
};

/// Level-set residual of Cbar at the sections of the orbit from (x0, y0).
inline ResonantSectionReport resonant_section_residual(const ResonantIntegral& R, double epsilon, double x0, double y0,
                                                       long n_periods) {
  const double w1 = R.combined.params.omega1_value();
  ResonantSectionReport rep;
  rep.binding = PhaseBinding::from_initial_condition(x0, y0, w1);
  rep.conic = resonant_section_form(R, epsilon, rep.binding);
  const CompiledIntegral cbar(R.combined, rep.binding);
  rep.level = cbar(x0, y0, 0.0, epsilon);
  SystemParams p = R.combined.params;
  p.epsilon = epsilon;
  const auto section = section_orbit(p, x0, y0, n_periods, kEscapeRadius);
  double worst = 0.0;
  for (const auto& s : section) worst = std::max(worst, std::abs(cbar(s.x, s.y, s.t, epsilon) - rep.level));
  rep.residual = worst / std::abs(rep.level);
  return rep;
}

/// Same residual for a raw C-series truncation (secular terms included).
inline double raw_c_residual(const PhaseIntegral& C, int S, double epsilon, double x0, double y0, long n_periods) {
  const double w1 = C.params.omega1_value();
  const auto bind = PhaseBinding::from_initial_condition(x0, y0, w1);
  const CompiledIntegral c(C, bind);
  const double level = c.evaluate(x0, y0, 0.0, epsilon, S);
  SystemParams p = C.params;
  p.epsilon = epsilon;
  const auto section = section_orbit(p, x0, y0, n_periods, kEscapeRadius);
  double worst = 0.0;
  for (const auto& s : section) worst = std::max(worst, std::abs(c.evaluate(s.x, s.y, s.t, epsilon, S) - level));
  return worst / std::abs(level);
}

}  // namespace mathieu
