#pragma once

#include "mathieu/analysis.hpp"
#include "mathieu/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mathieu::cli {

enum class Format { Csv, Json };

struct RunConfig {
  std::string subcommand;
  std::string omega = "2";
  std::string omega1 = "9/10";
  std::optional<double> epsilon;
  double x0 = 0.0;
  double y0 = 1.0;
  long periods = 200;
  bool periods_given = false;
  std::optional<double> time;
  int order = kDefaultOrder;
  bool order_given = false;
  std::string orders = "2,4,6";
  std::string out;
  Format format = Format::Csv;
  bool section_only = false;
  bool dump_symbolic = false;
  int sign = 1;
  int samples = 20;
  int n = 1;
  std::string oracle = "trace";
  std::string grid = "0:0.18:10";

  SystemParams params() const {
    SystemParams p;
    p.omega = parse_rational(omega);
    p.omega1 = parse_rational(omega1);
    p.epsilon = epsilon.value_or(0.1);
    p.validate();
    return p;
  }
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

/// Output goes to --out when given, else to standard output.
inline void emit(const RunConfig& cfg, Io io, const std::string& content) {
  if (cfg.out.empty()) io.out << content;
  else write_atomic(cfg.out, content);
}

inline std::vector<int> parse_orders(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw DomainError("bad order list: " + s);
    }
  }
  if (out.empty()) throw DomainError("empty order list");
  return out;
}

// "lo:hi:n" -> n evenly spaced values
inline std::vector<double> parse_grid(const std::string& s) {
  double lo = 0, hi = 0;
  int n = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1) throw DomainError("bad grid: " + s);
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return g;
}

inline int cmd_build_integral(const RunConfig& cfg, Io io) {
  const SystemParams p = cfg.params();
  const RationalIntegral phi = build_integral(p, cfg.order);
  json doc = integral_json(phi);
  json table = json::array();
  for (double e : parse_grid(cfg.grid)) {
    const Conic c = conic_at_section(phi, e);
    table.push_back(json{{"epsilon", e}, {"A", c.A}, {"B", c.B}, {"D", c.D}});
  }
  doc["conic"] = std::move(table);
  emit(cfg, io, doc.dump(1) + "\n");
  if (cfg.dump_symbolic) {
    if (cfg.out.empty()) io.out << pretty_integral(phi);
    else write_atomic(cfg.out + ".txt", pretty_integral(phi));
  }
  return 0;
}

inline Trajectory run_orbit(const RunConfig& cfg, int samples) {
  const SystemParams p = cfg.params();
  OrbitOptions opt;
  opt.samples_per_period = samples;
  if (cfg.time) return integrate_orbit_time(p, cfg.x0, cfg.y0, *cfg.time, opt);
  return integrate_orbit(p, cfg.x0, cfg.y0, cfg.periods, opt);
}

inline void note_escape(const std::vector<SectionPoint>& sec, Io io) {
  if (sec.empty()) return;
  const auto rep = escape_diagnostics(sec);
  if (rep.escaped)
    io.err << "escaped: r > " << kEscapeRadius << " at k=" << *rep.k_escape << ", growth rate "
           << fmt17(rep.growth_rate.value_or(0.0)) << "\n";
}

// With --periods n the section holds k = 0 .. n-1: the start point plus n-1 images.
inline int emit_section(const RunConfig& cfg, Io io, std::vector<SectionPoint> sec) {
  if (!cfg.time)
    std::erase_if(sec, [&](const SectionPoint& p) { return p.k >= cfg.periods; });
  note_escape(sec, io);
  if (cfg.format == Format::Json) {
    json doc{{"section", section_json(sec)}, {"escape", escape_json(escape_diagnostics(sec))}};
    emit(cfg, io, doc.dump(1) + "\n");
  } else {
    emit(cfg, io, section_csv(sec));
  }
  return 0;
}

inline int cmd_orbit(const RunConfig& cfg, Io io) {
  const Trajectory tr = run_orbit(cfg, cfg.section_only ? 1 : cfg.samples);
  const auto sec = stroboscopic_section(tr);
  if (cfg.section_only) return emit_section(cfg, io, sec);
  note_escape(sec, io);
  if (cfg.format == Format::Json) emit(cfg, io, json{{"trajectory", trajectory_json(tr)}}.dump(1) + "\n");
  else emit(cfg, io, trajectory_csv(tr));
  return 0;
}

inline int cmd_section(const RunConfig& cfg, Io io) {
  return emit_section(cfg, io, stroboscopic_section(run_orbit(cfg, 1)));
}

inline int cmd_distances(const RunConfig& cfg, Io io) { return cmd_section(cfg, io); }

inline int cmd_energy(const RunConfig& cfg, Io io) {
  const Trajectory tr = run_orbit(cfg, cfg.samples);
  double e_min = tr.states.front().E, e_max = e_min, drift = 0.0;
  for (const auto& s : tr.states) {
    e_min = std::min(e_min, s.E);
    e_max = std::max(e_max, s.E);
    drift = std::max(drift, std::abs(hamiltonian(tr.params, s.x, s.y, s.t) + s.E));
  }
  io.err << "E in [" << fmt17(e_min) << ", " << fmt17(e_max) << "], max |H+E| = " << fmt17(drift) << "\n";
  note_escape(stroboscopic_section(tr), io);
  if (cfg.format == Format::Json) emit(cfg, io, json{{"trajectory", trajectory_json(tr)}}.dump(1) + "\n");
  else emit(cfg, io, trajectory_csv(tr));
  return 0;
}

inline int cmd_critical_eps(const RunConfig& cfg, Io io) {
  const SystemParams p = cfg.params();
  Oracle oracle = Oracle::Trace;
  if (cfg.oracle == "escape") oracle = Oracle::Escape;
  else if (cfg.oracle != "trace") throw DomainError("oracle must be trace or escape");
  const auto res = critical_epsilon(p, cfg.sign, oracle);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g\n", res.eps_crit);
  io.out << buf;
  if (!cfg.out.empty()) {
    json doc = critical_json(res);
    doc["omega"] = cfg.omega;
    doc["omega1"] = cfg.omega1;
    doc["sign"] = cfg.sign;
    write_atomic(cfg.out, doc.dump(1) + "\n");
  }
  return 0;
}

inline int cmd_monodromy(const RunConfig& cfg, Io io) {
  const SystemParams p = cfg.params();
  json doc = monodromy_json(monodromy(p, cfg.n));
  doc["epsilon"] = p.epsilon;
  emit(cfg, io, doc.dump(1) + "\n");
  return 0;
}

inline int cmd_resonant(const RunConfig& cfg, Io io) {
  const SystemParams p = cfg.params();
  const int S = cfg.order_given ? cfg.order : 3;
  const long periods = cfg.periods_given ? cfg.periods : 15;
  const ResonantIntegral R = build_resonant_integral(p, S);
  const auto rep = resonant_section_residual(R, p.epsilon, cfg.x0, cfg.y0, periods);
  json q = json::array();
  for (std::size_t i = 0; i < R.mix.size(); ++i)
    q.push_back(json{{"i", i + 1}, {"value", R.mix[i].str()}, {"terms", phase_poly_json(R.mix[i])}});
  json doc{{"omega", cfg.omega},
           {"omega1", cfg.omega1},
           {"order", S},
           {"epsilon", p.epsilon},
           {"q", std::move(q)},
           {"C", integral_json(R.base)},
           {"Cbar", integral_json(R.combined)},
           {"binding", json{{"c0", rep.binding.c0}, {"s0", rep.binding.s0}}},
           {"Cbar_str", json{{"A", rep.conic.A}, {"B", rep.conic.B}, {"D", rep.conic.D}}},
           {"level", rep.level},
           {"periods", periods},
           {"section_residual", rep.residual}};
  emit(cfg, io, doc.dump(1) + "\n");
  if (cfg.dump_symbolic) {
    std::string txt = "C-series\n" + pretty_integral(R.base) + "Cbar\n" + pretty_integral(R.combined);
    if (cfg.out.empty()) io.out << txt;
    else write_atomic(cfg.out + ".txt", txt);
  }
  return 0;
}

inline int cmd_convergence(const RunConfig& cfg, Io io) {
  const SystemParams p = cfg.params();
  const auto rep = convergence_study(p, p.epsilon, parse_orders(cfg.orders), cfg.periods, cfg.x0, cfg.y0);
  if (cfg.format == Format::Json || !cfg.out.empty()) {
    emit(cfg, io, convergence_json(rep).dump(1) + "\n");
  } else {
    std::string txt = "order,residual\n";
    for (std::size_t i = 0; i < rep.orders.size(); ++i)
      txt += std::to_string(rep.orders[i]) + "," + fmt17(rep.residuals[i]) + "\n";
    io.out << txt;
  }
  return 0;
}

/// Parses argv and dispatches. Exit codes: 0 ok, 1 internal error,
/// 2 domain error or bad usage.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Formal integrals and stroboscopic sections of the Mathieu Hamiltonian"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string format = "csv";
  double eps_value = 0.1;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--omega", cfg.omega, "driving frequency (exact rational, e.g. 2)");
    sub->add_option("--omega1", cfg.omega1, "oscillator frequency (exact rational, e.g. 9/10 or 0.9)");
    sub->add_option("--epsilon", eps_value, "perturbation strength");
    sub->add_option("--x0", cfg.x0, "initial x");
    sub->add_option("--y0", cfg.y0, "initial y");
    sub->add_option("--periods", cfg.periods, "number of periods T = 2 pi / omega");
    sub->add_option("--time", cfg.time, "time horizon (overrides --periods)");
    sub->add_option("--order", cfg.order, "truncation order");
    sub->add_option("--orders", cfg.orders, "comma-separated orders");
    sub->add_option("--out", cfg.out, "output file (written atomically)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--section-only", cfg.section_only, "only the t = kT samples");
    sub->add_flag("--dump-symbolic", cfg.dump_symbolic, "human-readable series dump");
    sub->add_option("--sign", cfg.sign, "side of the critical value (+1 or -1)")->check(CLI::IsMember({-1, 1}));
    sub->add_option("--samples", cfg.samples, "samples per period")->check(CLI::PositiveNumber);
    sub->add_option("--n", cfg.n, "periods in the monodromy matrix")->check(CLI::PositiveNumber);
    sub->add_option("--oracle", cfg.oracle, "trace or escape");
    sub->add_option("--grid", cfg.grid, "epsilon grid lo:hi:n for the conic table");
    return sub;
  };
  using Handler = int (*)(const RunConfig&, Io);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"build-integral", "build the formal integral and dump it", cmd_build_integral},
      {"orbit", "integrate an orbit (CSV k,t,x,y,E,d,r)", cmd_orbit},
      {"section", "stroboscopic section at t = kT", cmd_section},
      {"distances", "section distances d and r", cmd_distances},
      {"energy", "trajectory with the extended energy E", cmd_energy},
      {"critical-eps", "escape boundary eps_crit", cmd_critical_eps},
      {"monodromy", "fundamental matrix over n periods", cmd_monodromy},
      {"resonant", "resonant case omega = 2 omega1", cmd_resonant},
      {"convergence", "residual of the truncated integral by order", cmd_convergence},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, h] : commands) subs.push_back(common(app.add_subcommand(name, help)));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    for (auto* s : subs)
      if (s->parsed()) out << s->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    CLI::App* s = subs[i];
    if (!s->parsed()) continue;
    cfg.subcommand = std::get<0>(commands[i]);
    if (s->count("--epsilon")) cfg.epsilon = eps_value;
    cfg.periods_given = s->count("--periods") > 0;
    cfg.order_given = s->count("--order") > 0;
    cfg.format = format == "json" ? Format::Json : Format::Csv;
    try {
      if (cfg.periods < 1) throw DomainError("--periods must be >= 1");
      return std::get<2>(commands[i])(cfg, {out, err});
    } catch (const DomainError& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      err << "internal error: " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}

}  // namespace mathieu::cli
