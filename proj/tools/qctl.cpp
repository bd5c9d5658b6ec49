// Command-line driver: solve, verify, check.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qctl/analysis.hpp"
#include "qctl/checks.hpp"
#include "qctl/config.hpp"
#include "qctl/optimizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qctl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitMaxIters = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitSoftware = 70;

struct CommonFlags {
  std::string out_dir;
  long long seed = -1;
  int refine = -1;
};

// non-finite numbers become null
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

json arcs_json(const OptimalityReport& rep) {
  json a = json::array();
  for (const Arc& arc : rep.arc_structure.arcs) {
    a.push_back({{"kind", std::string(to_string(arc.kind))},
                 {"t_start", arc.t_start},
                 {"t_end", arc.t_end},
                 {"first_interval", arc.first},
                 {"last_interval", arc.last}});
  }
  return {{"schema", 1},
          {"eps_u", rep.eps_u},
          {"eps_lambda", rep.eps_lambda},
          {"arcs", a},
          {"junction_times", rep.arc_structure.junction_times},
          {"bang_bang_junctions", rep.arc_structure.bang_bang_junctions},
          {"unresolved_measure", rep.arc_structure.unresolved_measure}};
}

json verdicts_json(const OptimalityReport& rep) {
  json v = json::object();
  for (const Verdict& d : rep.verdicts) {
    v[d.name] = {{"pass", d.pass}, {"value", num(d.value)}, {"tolerance", num(d.tolerance)}};
  }
  return v;
}

json report_json(const OptimalityReport& rep) {
  json r = {{"schema", 1},
            {"cost", rep.cost},
            {"first_order_violation", rep.first_order_violation},
            {"strict_complementarity_margin", num(rep.strict_complementarity_margin)},
            {"has_boundary_arcs", rep.has_boundary_arcs},
            {"R_scale", rep.R_scale},
            {"R_on_singular_min", num(rep.R_on_singular_min)},
            {"R_at_bb_junctions_min", num(rep.R_at_bb_junctions_min)},
            {"pc2_probe_min_ratio", num(rep.pc2_probe_min_ratio)},
            {"pc2_probe_count", rep.pc2_ratios.size()},
            {"pc2_note",
             "a nonnegative minimum ratio over sampled directions is a necessary symptom of the "
             "coercivity condition, not a proof of it"},
            {"arc_structure", arcs_json(rep)},
            {"verdicts", verdicts_json(rep)},
            {"all_pass", rep.all_pass()}};
  r["lambda"] = rep.lambda;
  r["R_nodes"] = rep.R_nodes;
  return r;
}

json problem_summary(const ProblemSpec& s) {
  return {{"x_lo", s.grid.x_lo}, {"x_hi", s.grid.x_hi}, {"n_x", s.grid.n_x},
          {"T", s.tgrid.T},      {"n_t", s.tgrid.n_t},   {"alpha1", s.alpha1},
          {"alpha2", s.alpha2},  {"u_min", s.bounds.lower}, {"u_max", s.bounds.upper}};
}

RunConfig load(const std::string& path, const CommonFlags& flags, int refine) {
  RunConfig cfg = load_config(path, refine);
  if (flags.seed >= 0) {
    cfg.analysis.seed = static_cast<unsigned long long>(flags.seed);
    cfg.start_seed = static_cast<unsigned>(flags.seed);
  }
  if (!flags.out_dir.empty()) cfg.output.dir = flags.out_dir;
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  return cfg;
}

int cmd_solve(const std::string& config_path, const CommonFlags& flags) {
  RunConfig cfg;
  try {
    cfg = load(config_path, flags, std::max(flags.refine, 0));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  const ProblemSpec& spec = cfg.problem;
  SolveResult res;
  try {
    res = cfg.n_starts > 1 ? multistart(spec, cfg.solver, cfg.n_starts, cfg.start_seed)
                           : solve(spec, cfg.solver);
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitSoftware;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitSoftware;
  }

  std::optional<OptimalityReport> rep;
  std::string report_error;
  try {
    rep = full_report(spec, res.u_opt, cfg.analysis);
  } catch (const std::exception& e) {
    report_error = e.what();
  }

  const fs::path dir(cfg.output.dir);
  fs::create_directories(dir);
  const Trajectory psi = propagate_forward(spec, res.u_opt);
  const CostBreakdown cost = evaluate_cost(spec, res.u_opt, psi);
  const TimeGrid& tg = spec.tgrid;

  if (cfg.output.csv) {
    std::ostringstream u, lam, pf, ch;
    u << "t_mid,u\n";
    for (std::size_t k = 0; k < tg.intervals(); ++k) u << fmt(tg.mid(k)) << "," << fmt(res.u_opt[k]) << "\n";
    const std::vector<double> lambda = rep ? rep->lambda : gradient_with_state(spec, res.u_opt).lambda;
    lam << "t_mid,lambda\n";
    for (std::size_t k = 0; k < tg.intervals(); ++k) lam << fmt(tg.mid(k)) << "," << fmt(lambda[k]) << "\n";
    pf << "x,re_psi,im_psi,abs_psi_sq\n";
    const ComplexField& last = psi.final();
    for (std::size_t j = 0; j < last.size(); ++j) {
      pf << fmt(spec.grid.node(j)) << "," << fmt(last[j].real()) << "," << fmt(last[j].imag()) << ","
         << fmt(std::norm(last[j])) << "\n";
    }
    ch << "iteration,cost,projected_grad_norm\n";
    for (std::size_t i = 0; i < res.cost_history.size(); ++i) {
      ch << i << "," << fmt(res.cost_history[i]) << ","
         << fmt(i < res.projected_grad_norms.size() ? res.projected_grad_norms[i] : NAN) << "\n";
    }
    write_text(dir / "u_opt.csv", u.str());
    write_text(dir / "lambda.csv", lam.str());
    write_text(dir / "psi_final.csv", pf.str());
    write_text(dir / "cost_history.csv", ch.str());
  }
  if (cfg.output.json) {
    json r = {{"schema", 1},
              {"command", "solve"},
              {"status", std::string(to_string(res.status))},
              {"converged", res.converged},
              {"iterations", res.iterations},
              {"cost", cost.total},
              {"cost_breakdown",
               {{"tracking_running", cost.tracking_running},
                {"tracking_final", cost.tracking_final},
                {"control_linear", cost.control_linear},
                {"control_quadratic", cost.control_quadratic}}},
              {"projected_grad_norm", res.projected_grad_norms.empty() ? json(nullptr)
                                                                         : num(res.projected_grad_norms.back())},
              {"grad_tol", cfg.solver.resolved_grad_tol(tg)},
              {"first_order_violation", res.first_order_violation},
              {"n_starts", cfg.n_starts},
              {"start_costs", res.start_costs},
              {"diagnostics", res.diagnostics},
              {"problem", problem_summary(spec)},
              {"warnings", cfg.warnings}};
    if (rep) {
      r["verdicts"] = verdicts_json(*rep);
      r["all_pass"] = rep->all_pass();
      r["strict_complementarity_margin"] = num(rep->strict_complementarity_margin);
      r["R_on_singular_min"] = num(rep->R_on_singular_min);
      r["R_at_bb_junctions_min"] = num(rep->R_at_bb_junctions_min);
      r["pc2_probe_min_ratio"] = num(rep->pc2_probe_min_ratio);
      r["singular_arc_count"] = rep->arc_structure.count(ArcKind::singular);
      write_text(dir / "arcs.json", arcs_json(*rep).dump(2) + "\n");
    } else {
      r["report_error"] = report_error;
    }
    write_text(dir / "result.json", r.dump(2) + "\n");
  }

  std::cout << "status " << to_string(res.status) << ", iterations " << res.iterations << ", cost "
            << fmt(cost.total) << "\n";
  if (!res.diagnostics.empty()) std::cout << res.diagnostics << "\n";
  if (rep) {
    for (const Arc& a : rep->arc_structure.arcs) {
      std::cout << "  " << to_string(a.kind) << " [" << a.t_start << ", " << a.t_end << "]\n";
    }
  }
  return res.converged ? kExitOk : kExitMaxIters;
}

// Reads the last column of a CSV with a header row.
std::vector<double> read_control_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::vector<double> out;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const std::string cell = line.substr(line.find_last_of(',') == std::string::npos ? 0 : line.find_last_of(',') + 1);
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == 0 || !std::isfinite(v)) throw std::runtime_error("bad value '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_verify(const std::string& config_path, const std::string& csv, const CommonFlags& flags) {
  RunConfig cfg;
  try {
    cfg = load(config_path, flags, std::max(flags.refine, 0));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  const ProblemSpec& spec = cfg.problem;
  std::vector<double> u;
  try {
    u = read_control_csv(csv);
  } catch (const std::exception& e) {
    std::cerr << "control file error: " << e.what() << "\n";
    return kExitData;
  }
  if (u.size() != spec.tgrid.intervals()) {
    std::cerr << "control length " << u.size() << " does not match n_t = " << spec.tgrid.n_t << "\n";
    return kExitData;
  }
  const Control ctrl(u, spec.bounds);
  if (!ctrl.admissible()) {
    std::cerr << "control violates the bounds [" << spec.bounds.lower << ", " << spec.bounds.upper << "]\n";
    return kExitData;
  }

  const fs::path dir(cfg.output.dir);
  fs::create_directories(dir);
  json out;
  int code = kExitOk;
  try {
    const OptimalityReport rep = full_report(spec, ctrl, cfg.analysis);
    out = report_json(rep);
    code = rep.all_pass() ? kExitOk : kExitFail;
    for (const Verdict& v : rep.verdicts) {
      std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " value " << v.value << " tol "
                << v.tolerance << "\n";
    }
  } catch (const StructureError& e) {
    out = {{"schema", 1}, {"error", e.what()}, {"all_pass", false}};
    std::cout << "FAIL arc structure: " << e.what() << "\n";
    code = kExitFail;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitSoftware;
  }
  out["command"] = "verify";
  out["problem"] = problem_summary(spec);
  write_text(dir / "report.json", out.dump(2) + "\n");
  return code;
}

int cmd_check(const std::string& config_path, const std::string& which, const CommonFlags& flags) {
  const int levels = flags.refine < 0 ? 1 : flags.refine;
  RunConfig base;
  try {
    base = load(config_path, flags, 0);
    for (int l = 1; l <= levels; ++l) load_config(config_path, l);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  const SpecLadder ladder = [&](int l) { return l == 0 ? base.problem : load_config(config_path, l).problem; };
  const unsigned long long seed = flags.seed >= 0 ? static_cast<unsigned long long>(flags.seed) : 12345ULL;

  std::vector<SuiteResult> results;
  const bool all = which == "all";
  if (all || which == "grad") results.push_back(check_gradient(ladder, levels, seed));
  if (all || which == "ibp") results.push_back(check_ibp(ladder, levels, seed));
  if (all || which == "unitary") results.push_back(check_unitary(ladder, levels, seed));
  if (all || which == "goh") results.push_back(check_goh(ladder, levels, seed, base.analysis.scheme));

  bool pass = true;
  std::printf("%-8s %6s %12s %12s  %s\n", "suite", "n_t", "value", "tolerance", "quantity");
  for (const SuiteResult& r : results) {
    for (const CheckLine& l : r.lines) {
      std::printf("%-8s %6d %12.3e %12.3e  %s%s\n", r.name.c_str(), l.n_t, l.value, l.tolerance,
                  l.what.c_str(), l.pass ? "" : "  [above tolerance]");
    }
    if (std::isfinite(r.order)) {
      std::printf("%-8s %6s %12.3f %12.3f  observed order (>= tolerance)\n", r.name.c_str(), "-", r.order,
                  r.order_tolerance);
    }
    std::printf("%-8s %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL");
    pass = pass && r.pass;
  }
  return pass ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of the bilinear 1-D Schrodinger equation"};
  app.require_subcommand(1);
  CommonFlags flags;
  app.add_option("--out-dir", flags.out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", flags.seed, "seed for probes, multistart and check sampling");
  app.add_option("--refine", flags.refine,
                 "solve/verify: double n_t k times; check: number of refinement levels (default 1)");

  std::string config, csv, which = "all";
  auto* solve_cmd = app.add_subcommand("solve", "minimize the reduced cost");
  solve_cmd->add_option("config", config, "JSON config")->required();
  auto* verify_cmd = app.add_subcommand("verify", "optimality report for a control");
  verify_cmd->add_option("config", config, "JSON config")->required();
  verify_cmd->add_option("control", csv, "CSV with a header row; last column is u")->required();
  auto* check_cmd = app.add_subcommand("check", "verification suites");
  check_cmd->add_option("config", config, "JSON config")->required();
  check_cmd->add_option("--which", which, "grad|goh|ibp|unitary|all")
      ->check(CLI::IsMember({"grad", "goh", "ibp", "unitary", "all"}));
  for (auto* sub : {solve_cmd, verify_cmd, check_cmd}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(config, flags);
    if (*verify_cmd) return cmd_verify(config, csv, flags);
    return cmd_check(config, which, flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSoftware;
  }
}
