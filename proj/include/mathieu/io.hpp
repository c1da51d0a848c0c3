#pragma once

#include "mathieu/analysis.hpp"
#include "mathieu/dynamics.hpp"
#include "mathieu/integral_builder.hpp"
#include "mathieu/resonant_builder.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace mathieu {

using json = nlohmann::ordered_json;

// ---- symbolic ----

inline json rational_json(const Rational& r) {
  return json{{"num", numerator_of(r).str()}, {"den", denominator_of(r).str()}};
}

inline void append_term_json(json& arr, const TermKey& key, const Rational& c) {
  json j{{"p", key.p}, {"k", key.freq.k}, {"m", key.freq.m}, {"phase", key.phase == Phase::Cos ? "cos" : "sin"}};
  j.update(rational_json(c));
  arr.push_back(std::move(j));
}

inline void append_term_json(json& arr, const TermKey& key, const PhasePoly& c) {
  for (const auto& [mono, r] : c.terms()) {
    json j{{"p", key.p}, {"k", key.freq.k}, {"m", key.freq.m}, {"phase", key.phase == Phase::Cos ? "cos" : "sin"}};
    j.update(rational_json(r));
    j["generators"] = json{{"c0", mono.c}, {"s0", mono.s}};
    arr.push_back(std::move(j));
  }
}

/// List of {p, k, m, phase, num, den}, sorted by (p, k, m, phase).
template <class Coeff>
json series_json(const TrigSeries<Coeff>& s) {
  json arr = json::array();
  for (const auto& [key, c] : s.terms()) append_term_json(arr, key, c);
  return arr;
}

template <class Coeff>
json quad_form_json(const QuadFormSeries<Coeff>& q, int order) {
  return json{{"order", order}, {"cxx", series_json(q.cxx)}, {"cyy", series_json(q.cyy)}, {"cxy", series_json(q.cxy)}};
}

template <class Coeff>
json integral_json(const FormalIntegral<Coeff>& phi) {
  json orders = json::array();
  for (int s = 0; s <= phi.order(); ++s) orders.push_back(quad_form_json(phi.orders[static_cast<std::size_t>(s)], s));
  return json{{"omega", to_string(phi.params.omega)},
              {"omega1", to_string(phi.params.omega1)},
              {"seed", to_string(phi.seed)},
              {"secular_allowed", phi.secular_allowed},
              {"orders", std::move(orders)}};
}

inline std::string coeff_str(const Rational& r) { return to_string(r); }
inline std::string coeff_str(const PhasePoly& p) { return p.str(); }

/// Human-readable dump with harmonics grouped by k.
template <class Coeff>
std::string pretty_series(const TrigSeries<Coeff>& s) {
  if (s.empty()) return "    0\n";
  std::map<int, std::vector<std::string>> by_k;
  for (const auto& [key, c] : s.terms()) {
    std::string term = "(" + coeff_str(c) + ")";
    if (key.p == 1) term += " t";
    if (key.p > 1) term += " t^" + std::to_string(key.p);
    if (!key.freq.is_zero() || key.phase == Phase::Sin) {
      term += key.phase == Phase::Cos ? " cos(" : " sin(";
      term += std::to_string(key.freq.k) + " w";
      if (key.freq.m != 0) term += (key.freq.m > 0 ? " + " : " - ") + std::to_string(std::abs(key.freq.m)) + " w1";
      term += ") t";
    }
    by_k[key.freq.k].push_back(term);
  }
  std::string out;
  for (const auto& [k, terms] : by_k) {
    out += "    k=" + std::to_string(k) + ":";
    for (std::size_t i = 0; i < terms.size(); ++i) out += (i ? " + " : " ") + terms[i];
    out += "\n";
  }
  return out;
}

template <class Coeff>
std::string pretty_integral(const FormalIntegral<Coeff>& phi) {
  std::string out = "omega = " + to_string(phi.params.omega) + ", omega1 = " + to_string(phi.params.omega1) +
                    ", seed " + to_string(phi.seed) + "\n";
  for (int s = 0; s <= phi.order(); ++s) {
    const auto& q = phi.orders[static_cast<std::size_t>(s)];
    out += "order " + std::to_string(s) + "\n";
    out += "  x^2:\n" + pretty_series(q.cxx);
    out += "  y^2:\n" + pretty_series(q.cyy);
    out += "  xy:\n" + pretty_series(q.cxy);
  }
  return out;
}

inline json phase_poly_json(const PhasePoly& p) {
  json arr = json::array();
  for (const auto& [mono, r] : p.terms()) {
    json j = rational_json(r);
    j["generators"] = json{{"c0", mono.c}, {"s0", mono.s}};
    arr.push_back(std::move(j));
  }
  return arr;
}

// ---- numeric ----

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* kCsvHeader = "k,t,x,y,E,d,r";

inline std::string csv_row(long k, double t, double x, double y, double E, double d, double r) {
  return std::to_string(k) + "," + fmt17(t) + "," + fmt17(x) + "," + fmt17(y) + "," + fmt17(E) + "," + fmt17(d) +
         "," + fmt17(r) + "\n";
}

/// Trajectory rows; k is the index of the period a sample falls in (exact at sections).
inline std::string trajectory_csv(const Trajectory& tr) {
  std::string out = std::string(kCsvHeader) + "\n";
  const double T = tr.params.period();
  const double w1 = tr.params.omega1_value();
  const auto spp = static_cast<std::size_t>(tr.samples_per_period);
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& s = tr.states[i];
    const long k = i % spp == 0 ? std::lround(s.t / T) : static_cast<long>(std::floor(s.t / T));
    out += csv_row(k, s.t, s.x, s.y, s.E, std::hypot(w1 * s.x, s.y), std::hypot(s.x, s.y));
  }
  return out;
}

inline std::string section_csv(const std::vector<SectionPoint>& sec) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& p : sec) out += csv_row(p.k, p.t, p.x, p.y, p.E, p.d, p.r);
  return out;
}

inline json section_json(const std::vector<SectionPoint>& sec) {
  json arr = json::array();
  for (const auto& p : sec)
    arr.push_back(json{{"k", p.k}, {"t", p.t}, {"x", p.x}, {"y", p.y}, {"E", p.E}, {"d", p.d}, {"r", p.r}});
  return arr;
}

inline json trajectory_json(const Trajectory& tr) {
  json arr = json::array();
  const double w1 = tr.params.omega1_value();
  for (const auto& s : tr.states)
    arr.push_back(json{{"t", s.t}, {"x", s.x}, {"y", s.y}, {"E", s.E}, {"d", std::hypot(w1 * s.x, s.y)},
                       {"r", std::hypot(s.x, s.y)}});
  return arr;
}

inline json monodromy_json(const Monodromy& m) {
  json ev = json::array();
  for (const auto& l : m.eigenvalues()) ev.push_back(json{{"re", l.real()}, {"im", l.imag()}, {"abs", std::abs(l)}});
  return json{{"n", m.n},         {"m11", m.m11},   {"m12", m.m12},      {"m21", m.m21},
              {"m22", m.m22},     {"trace", m.trace()}, {"det", m.det()}, {"eigenvalues", std::move(ev)}};
}

inline json critical_json(const CriticalEpsResult& r) {
  json j{{"eps_crit", r.eps_crit}, {"bracket", {r.lo, r.hi}}, {"oracle", to_string(r.oracle)},
         {"iterations", r.iterations}};
  if (r.bounded_below) j["bounded_below"] = *r.bounded_below;
  if (r.escaped_above) j["escaped_above"] = *r.escaped_above;
  return j;
}

inline json convergence_json(const ConvergenceReport& r) {
  return json{{"epsilon", r.epsilon}, {"periods", r.periods}, {"orders", r.orders}, {"residuals", r.residuals}};
}

inline json escape_json(const EscapeReport& r) {
  json j{{"escaped", r.escaped}, {"r_max", r.r_max}};
  j["k_escape"] = r.k_escape ? json(*r.k_escape) : json(nullptr);
  j["growth_rate"] = r.growth_rate ? json(*r.growth_rate) : json(nullptr);
  j["r_squared"] = r.r_squared ? json(*r.r_squared) : json(nullptr);
  return j;
}

// ---- files ----

/// Writes through a temporary file in the same directory, then renames.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace mathieu
