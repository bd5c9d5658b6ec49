#pragma once

// JSON run configuration. Every object rejects keys it does not know, except
// "_comment", which is accepted (and ignored) anywhere so shipped configs can
// say which values are repo defaults.

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qctl/analysis.hpp"
#include "qctl/optimizer.hpp"

namespace qctl {

using nlohmann::json;

struct OutputOptions {
  std::string dir = "out";
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  ProblemSpec problem;
  SolverOptions solver;
  int n_starts = 1;
  unsigned start_seed = 1;
  AnalysisOptions analysis;
  OutputOptions output;
  std::vector<std::string> warnings;
};

namespace config_detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [k, _] : j_.items()) {
      if (k == "_comment") continue;
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) throw ConfigError("unknown key '" + key(k) + "'");
    }
  }

  bool has(const char* k) const { return j_.contains(k); }
  const json& raw(const char* k) const {
    if (!j_.contains(k)) throw ConfigError("missing key '" + key(k) + "'");
    return j_.at(k);
  }
  Reader object(const char* k) const { return Reader(raw(k), key(k)); }

  double number(const char* k) const {
    const json& v = raw(k);
    if (!v.is_number()) throw ConfigError("key '" + key(k) + "' must be a number");
    return v.get<double>();
  }
  double number(const char* k, double dflt) const { return has(k) ? number(k) : dflt; }

  int integer(const char* k) const {
    const json& v = raw(k);
    if (!v.is_number_integer()) throw ConfigError("key '" + key(k) + "' must be an integer");
    return v.get<int>();
  }
  int integer(const char* k, int dflt) const { return has(k) ? integer(k) : dflt; }

  bool boolean(const char* k, bool dflt) const {
    if (!has(k)) return dflt;
    const json& v = raw(k);
    if (!v.is_boolean()) throw ConfigError("key '" + key(k) + "' must be a boolean");
    return v.get<bool>();
  }

  std::string string(const char* k) const {
    const json& v = raw(k);
    if (!v.is_string()) throw ConfigError("key '" + key(k) + "' must be a string");
    return v.get<std::string>();
  }
  std::string string(const char* k, std::string dflt) const { return has(k) ? string(k) : dflt; }

  std::vector<double> numbers(const char* k) const {
    const json& v = raw(k);
    if (!v.is_array()) throw ConfigError("key '" + key(k) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("key '" + key(k) + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + msg);
  }

 private:
  const json& j_;
  std::string path_;
};

inline Potential parse_b2(const Reader& r, const SpatialGrid& grid, std::vector<std::string>& warn) {
  const std::string type = r.string("type");
  const double L = grid.x_hi - grid.x_lo;
  const double lo = grid.x_lo;
  if (type == "bump") {
    // c s^2 (1 - s)^2 with s = (x - x_lo)/L; b2, b2' vanish at both ends
    r.allow({"type", "c"});
    const double c = r.number("c");
    return Potential::analytic(
        grid,
        [=](double x) {
          const double s = (x - lo) / L;
          return c * s * s * (1 - s) * (1 - s);
        },
        [=](double x) {
          const double s = (x - lo) / L;
          return 2.0 * c * s * (1 - s) * (1 - 2 * s) / L;
        },
        [=](double x) {
          const double s = (x - lo) / L;
          return 2.0 * c * (1 - 6 * s + 6 * s * s) / (L * L);
        });
  }
  if (type == "sine") {
    r.allow({"type", "c"});
    const double c = r.number("c");
    const double k = std::numbers::pi / L;
    warn.push_back(r.key("type") +
                   ": 'sine' has nonzero slope at the boundary; offered for experiments only");
    return Potential::analytic(
        grid, [=](double x) { return c * std::sin(k * (x - lo)); },
        [=](double x) { return c * k * std::cos(k * (x - lo)); },
        [=](double x) { return -c * k * k * std::sin(k * (x - lo)); });
  }
  if (type == "constant") {
    r.allow({"type", "value"});
    const double v = r.number("value");
    return Potential::analytic(
        grid, [=](double) { return v; }, [](double) { return 0.0; }, [](double) { return 0.0; });
  }
  if (type == "custom_samples") {
    r.allow({"type", "values", "boundary"});
    auto v = r.numbers("values");
    if (v.size() != grid.size()) {
      throw ConfigError(r.key("values") + ": expected " + std::to_string(grid.size()) +
                        " interior samples, got " + std::to_string(v.size()));
    }
    double blo = 0.0, bhi = 0.0;
    if (r.has("boundary")) {
      const auto b = r.numbers("boundary");
      if (b.size() != 2) throw ConfigError(r.key("boundary") + ": expected [b(x_lo), b(x_hi)]");
      blo = b[0];
      bhi = b[1];
    }
    return Potential::from_samples(grid, std::move(v), blo, bhi);
  }
  throw ConfigError(r.key("type") + ": unknown b2 type '" + type +
                    "' (bump, sine, constant, custom_samples)");
}

/// First Dirichlet eigenvector of the discrete Laplacian, unit norm.
inline ComplexField ground_state(const SpatialGrid& grid) {
  const double L = grid.x_hi - grid.x_lo;
  ComplexField phi = ComplexField::sample(
      grid, [&](double x) { return cplx(std::sin(std::numbers::pi * (x - grid.x_lo) / L)); });
  phi *= 1.0 / norm(phi);
  return phi;
}

/// Its eigenvalue: -Delta_h phi = lambda_1 phi.
inline double ground_state_energy(const SpatialGrid& grid) {
  const double h = grid.h();
  const double s = std::sin(std::numbers::pi * h / (2.0 * (grid.x_hi - grid.x_lo)));
  return 4.0 / (h * h) * s * s;
}

inline ComplexField parse_field(const Reader& r, const SpatialGrid& grid) {
  const std::string type = r.string("type");
  if (type == "ground_state") {
    r.allow({"type", "phase"});
    ComplexField phi = ground_state(grid);
    phi *= std::exp(-kI * r.number("phase", 0.0));
    return phi;
  }
  if (type == "gaussian") {
    r.allow({"type", "center", "width", "k0", "normalize"});
    const double c = r.number("center"), w = r.number("width"), k0 = r.number("k0", 0.0);
    if (!(w > 0.0)) throw ConfigError(r.key("width") + ": must be > 0");
    ComplexField g = ComplexField::sample(grid, [=](double x) {
      const double d = (x - c) / w;
      return std::exp(-0.5 * d * d) * std::exp(kI * k0 * x);
    });
    if (r.boolean("normalize", true)) {
      const double n = norm(g);
      if (n == 0.0) throw ConfigError(r.key("center") + ": gaussian vanishes on the grid");
      g *= 1.0 / n;
    }
    return g;
  }
  if (type == "custom") {
    r.allow({"type", "re", "im"});
    const auto re = r.numbers("re");
    const auto im = r.has("im") ? r.numbers("im") : std::vector<double>(re.size(), 0.0);
    if (re.size() != grid.size() || im.size() != grid.size()) {
      throw ConfigError(r.key("re") + ": expected " + std::to_string(grid.size()) +
                        " interior values");
    }
    ComplexField out(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) out[j] = {re[j], im[j]};
    return out;
  }
  if (type == "zero") {
    r.allow({"type"});
    return ComplexField(grid);
  }
  throw ConfigError(r.key("type") + ": unknown field type '" + type +
                    "' (ground_state, gaussian, custom, zero)");
}

/// Running target: a static field, or the ground state with a rotating phase
/// exp(-i((lambda_1 + omega_shift) t + phase)).
inline TimeField parse_target(const Reader& r, const SpatialGrid& grid, const TimeGrid& tg) {
  const std::string type = r.string("type");
  if (type == "rotating_ground_state") {
    r.allow({"type", "omega_shift", "phase"});
    const double omega = ground_state_energy(grid) + r.number("omega_shift", 0.0);
    const double phase = r.number("phase", 0.0);
    const ComplexField phi = ground_state(grid);
    std::vector<ComplexField> s;
    s.reserve(tg.nodes());
    for (std::size_t k = 0; k < tg.nodes(); ++k) {
      ComplexField v = phi;
      v *= std::exp(-kI * (omega * tg.node(k) + phase));
      s.push_back(std::move(v));
    }
    return TimeField::sampled(std::move(s));
  }
  if (type == "zero") {
    r.allow({"type"});
    return TimeField::zero();
  }
  return TimeField::constant(parse_field(r, grid));
}

inline TimeField parse_source(const Reader& r, const SpatialGrid& grid) {
  const std::string type = r.string("type");
  if (type == "zero") {
    r.allow({"type"});
    return TimeField::zero();
  }
  return TimeField::constant(parse_field(r, grid));
}

inline ProblemSpec parse_problem(const Reader& r, std::vector<std::string>& warn) {
  r.allow({"domain", "time", "alpha1", "alpha2", "bounds", "b2", "f", "psi0", "psi_d", "psi_dT"});
  const Reader dom = r.object("domain");
  dom.allow({"x_lo", "x_hi", "n_x"});
  const Reader tim = r.object("time");
  tim.allow({"T", "n_t"});
  const Reader bnd = r.object("bounds");
  bnd.allow({"lower", "upper"});

  ProblemSpec s;
  try {
    s.grid = SpatialGrid(dom.number("x_lo", 0.0), dom.number("x_hi", 1.0), dom.integer("n_x", 40));
    s.tgrid = TimeGrid(tim.number("T", 10.0), tim.integer("n_t", 200));
    s.bounds = Bounds(bnd.number("lower"), bnd.number("upper"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid grid or bounds: ") + e.what());
  }
  s.alpha1 = r.number("alpha1", 0.0);
  s.alpha2 = r.number("alpha2", 0.0);
  if (s.alpha2 < 0.0) throw ConfigError(r.key("alpha2") + ": must be >= 0");

  s.pot = parse_b2(r.object("b2"), s.grid, warn);
  s.f = r.has("f") ? parse_source(r.object("f"), s.grid) : TimeField::zero();
  s.psi0 = parse_field(r.object("psi0"), s.grid);
  s.psi_d = parse_target(r.object("psi_d"), s.grid, s.tgrid);

  if (!r.has("psi_dT")) {
    s.psi_dT = s.psi_d.at_node(s.grid, s.tgrid.n_t);
  } else {
    const Reader t = r.object("psi_dT");
    if (t.string("type") == "final_running_target") {
      t.allow({"type"});
      s.psi_dT = s.psi_d.at_node(s.grid, s.tgrid.n_t);
    } else {
      s.psi_dT = parse_field(t, s.grid);
    }
  }
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  return s;
}

inline void parse_solver(const Reader& r, RunConfig& c) {
  r.allow({"max_iters", "grad_tol", "armijo_c", "backtrack_factor", "initial_step",
           "max_backtracks", "barzilai_borwein", "initial_value", "n_starts", "start_seed"});
  SolverOptions& o = c.solver;
  o.max_iters = r.integer("max_iters", o.max_iters);
  o.grad_tol = r.number("grad_tol", o.grad_tol);
  o.armijo_c = r.number("armijo_c", o.armijo_c);
  o.backtrack_factor = r.number("backtrack_factor", o.backtrack_factor);
  o.initial_step = r.number("initial_step", o.initial_step);
  o.max_backtracks = r.integer("max_backtracks", o.max_backtracks);
  o.barzilai_borwein = r.boolean("barzilai_borwein", o.barzilai_borwein);
  if (o.max_iters < 0) throw ConfigError(r.key("max_iters") + ": must be >= 0");
  if (!(o.armijo_c > 0.0 && o.armijo_c < 1.0)) throw ConfigError(r.key("armijo_c") + ": must be in (0,1)");
  if (!(o.backtrack_factor > 0.0 && o.backtrack_factor < 1.0)) {
    throw ConfigError(r.key("backtrack_factor") + ": must be in (0,1)");
  }
  if (!(o.initial_step > 0.0)) throw ConfigError(r.key("initial_step") + ": must be > 0");
  if (r.has("initial_value")) {
    const double v = r.number("initial_value");
    if (!c.problem.bounds.contains(v)) throw ConfigError(r.key("initial_value") + ": outside bounds");
    o.initial = Control::constant(c.problem.tgrid.intervals(), v, c.problem.bounds);
  }
  c.n_starts = r.integer("n_starts", 1);
  if (c.n_starts < 1) throw ConfigError(r.key("n_starts") + ": must be >= 1");
  c.start_seed = static_cast<unsigned>(r.integer("start_seed", 1));
}

inline void parse_analysis(const Reader& r, AnalysisOptions& a) {
  r.allow({"n_probe", "seed", "eps_u", "eps_lambda", "first_order_tol", "unresolved_tol",
           "R_rel_tol", "pc2_tol", "junction_window", "commutators"});
  a.n_probe = r.integer("n_probe", a.n_probe);
  if (a.n_probe < 0) throw ConfigError(r.key("n_probe") + ": must be >= 0");
  a.seed = static_cast<unsigned long long>(r.integer("seed", static_cast<int>(a.seed)));
  a.arcs.eps_u = r.number("eps_u", a.arcs.eps_u);
  a.arcs.eps_lambda = r.number("eps_lambda", a.arcs.eps_lambda);
  a.first_order_tol = r.number("first_order_tol", a.first_order_tol);
  a.unresolved_tol = r.number("unresolved_tol", a.unresolved_tol);
  a.R_rel_tol = r.number("R_rel_tol", a.R_rel_tol);
  a.pc2_tol = r.number("pc2_tol", a.pc2_tol);
  a.junction_window = r.number("junction_window", a.junction_window);
  const std::string sch = r.string("commutators", "assembled");
  if (sch == "assembled") {
    a.scheme = CommutatorScheme::assembled;
  } else if (sch == "analytic") {
    a.scheme = CommutatorScheme::analytic;
  } else {
    throw ConfigError(r.key("commutators") + ": expected 'assembled' or 'analytic'");
  }
}

inline void parse_output(const Reader& r, OutputOptions& o) {
  r.allow({"dir", "formats"});
  o.dir = r.string("dir", o.dir);
  if (r.has("formats")) {
    const json& f = r.raw("formats");
    if (!f.is_array()) throw ConfigError(r.key("formats") + ": must be an array");
    o.csv = o.json = false;
    for (const auto& e : f) {
      const std::string s = e.is_string() ? e.get<std::string>() : "";
      if (s == "csv") {
        o.csv = true;
      } else if (s == "json") {
        o.json = true;
      } else {
        throw ConfigError(r.key("formats") + ": entries must be \"csv\" or \"json\"");
      }
    }
  }
}

// 1-based line and column of a byte offset
inline std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace config_detail

/// Time-grid refinement by 2^k applied on top of the parsed problem.
inline RunConfig parse_config(const std::string& text, int refine = 0) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("JSON syntax error at " + config_detail::location(text, e.byte) + ": " +
                      e.what());
  }
  if (refine < 0 || refine > 10) throw ConfigError("--refine must be in [0, 10]");
  if (refine > 0 && j.is_object() && j.contains("problem") && j["problem"].is_object()) {
    auto& p = j["problem"];
    if (p.contains("time") && p["time"].is_object() && p["time"].contains("n_t") &&
        p["time"]["n_t"].is_number_integer()) {
      p["time"]["n_t"] = p["time"]["n_t"].get<int>() << refine;
    } else {
      p["time"]["n_t"] = 200 << refine;
    }
  }
  config_detail::Reader root(j, "");
  root.allow({"problem", "solver", "analysis", "output"});
  RunConfig c;
  c.problem = config_detail::parse_problem(root.object("problem"), c.warnings);
  if (root.has("solver")) config_detail::parse_solver(root.object("solver"), c);
  if (root.has("analysis")) config_detail::parse_analysis(root.object("analysis"), c.analysis);
  if (root.has("output")) config_detail::parse_output(root.object("output"), c.output);
  return c;
}

inline RunConfig load_config(const std::string& path, int refine = 0) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), refine);
}

}  // namespace qctl
