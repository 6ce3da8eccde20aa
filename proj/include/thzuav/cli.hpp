#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thzuav/convexity_audit.hpp"
#include "thzuav/optimizer.hpp"
#include "thzuav/scenario_io.hpp"
#include "thzuav/sweep.hpp"

namespace thzuav {
namespace clidetail {

struct CommonFlags {
  ScenarioParams params;
  std::string scenario_path;
  std::string out_path;
  std::string format = "json";
  std::string mode = "proposed";
  double tol = 1e-6;
  int max_iters = 100;
};

inline void add_scenario_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--scenario", f.scenario_path,
                  "read the scenario from this JSON file instead of "
                  "generating one");
  cmd->add_option("--seed", f.params.seed, "generator seed");
  cmd->add_option("--users", f.params.n_users, "number of ground users");
  cmd->add_option("--area", f.params.area_side, "square area side, m");
  cmd->add_option("--altitude", f.params.altitude, "hover altitude, m");
  cmd->add_option("--absorption", f.params.absorption,
                  "molecular absorption coefficient, 1/m");
  cmd->add_option("--bandwidth", f.params.total_bandwidth,
                  "total bandwidth, Hz");
  cmd->add_option("--energy", f.params.q_budget_j,
                  "per-user uplink energy budget, J");
  cmd->add_option("--max-power", f.params.p_max, "uplink power cap, W");
  cmd->add_option("--uav-power", f.params.q_uav, "downlink transmit power, W");
}

inline Scenario load_or_generate(const CommonFlags& f) {
  if (!f.scenario_path.empty()) {
    std::ifstream in(f.scenario_path);
    if (!in) {
      throw std::invalid_argument("cannot open scenario file: " +
                                  f.scenario_path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
  }
  return generate_scenario(f.params);
}

inline void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot open output file: " + out_path);
  }
  out << content;
}

inline std::vector<BaselineMode> modes_from_flag(const std::string& mode) {
  if (mode == "all") {
    return {BaselineMode::proposed, BaselineMode::ol, BaselineMode::op,
            BaselineMode::ow, BaselineMode::exh};
  }
  return {baseline_mode_from_name(mode)};
}

inline nlohmann::ordered_json trace_entry_json(const TraceEntry& e) {
  nlohmann::ordered_json j;
  j["k"] = e.k;
  j["objective_s"] = e.objective_s;
  j["x_m"] = e.x;
  j["y_m"] = e.y;
  j["max_power_change_w"] = e.max_power_change_w;
  j["max_bandwidth_change_hz"] = e.max_bandwidth_change_hz;
  j["convexity_certificate"] = e.convexity_certificate;
  return j;
}

inline std::string solve_result_json(const std::string& mode,
                                     const OptimizeResult& res) {
  nlohmann::ordered_json j;
  j["mode"] = mode;
  j["objective_s"] = res.objective_s;
  j["initial_objective_s"] = res.initial_objective_s;
  j["converged"] = res.trace.converged;
  j["iterations"] = res.trace.iterations.size();
  j["x_m"] = res.decision.x;
  j["y_m"] = res.decision.y;
  j["p_w"] = res.decision.p;
  j["w_hz"] = res.decision.w;
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const TraceEntry& e : res.trace.iterations) {
    trace.push_back(trace_entry_json(e));
  }
  j["trace"] = trace;
  return j.dump(2) + "\n";
}

inline std::string solve_result_csv(const OptimizeResult& res) {
  std::string out =
      "k,objective_s,x_m,y_m,max_power_change_w,max_bandwidth_change_hz,"
      "convexity_certificate\n";
  for (const TraceEntry& e : res.trace.iterations) {
    out += std::to_string(e.k);
    out += ',';
    out += format_double(e.objective_s);
    out += ',';
    out += format_double(e.x);
    out += ',';
    out += format_double(e.y);
    out += ',';
    out += format_double(e.max_power_change_w);
    out += ',';
    out += format_double(e.max_bandwidth_change_hz);
    out += ',';
    out += e.convexity_certificate ? '1' : '0';
    out += '\n';
  }
  return out;
}

inline int run_gen(const CommonFlags& f) {
  const Scenario s = load_or_generate(f);
  emit(f.out_path, serialize_scenario(s));
  return 0;
}

inline int run_solve(const CommonFlags& f) {
  if (f.mode == "all") {
    throw std::invalid_argument("solve takes a single mode; use compare for "
                                "side-by-side runs");
  }
  if (f.format != "json" && f.format != "csv") {
    throw std::invalid_argument("unknown format: " + f.format);
  }
  const BaselineMode mode = baseline_mode_from_name(f.mode);
  const Scenario s = load_or_generate(f);
  const Decision init = make_initial_decision(s);
  const OptimizeResult res =
      mode == BaselineMode::proposed
          ? optimize(s, init, f.tol, f.max_iters)
          : run_baseline(s, mode, init);
  emit(f.out_path, f.format == "json" ? solve_result_json(f.mode, res)
                                      : solve_result_csv(res));
  return 0;
}

inline int run_compare(const CommonFlags& f) {
  if (f.format != "json" && f.format != "csv") {
    throw std::invalid_argument("unknown format: " + f.format);
  }
  const std::vector<BaselineMode> modes = modes_from_flag(f.mode);
  const Scenario s = load_or_generate(f);
  const Decision init = make_initial_decision(s);

  double proposed_obj = std::numeric_limits<double>::quiet_NaN();
  std::vector<OptimizeResult> results;
  results.reserve(modes.size());
  for (BaselineMode m : modes) {
    results.push_back(m == BaselineMode::proposed
                          ? optimize(s, init, f.tol, f.max_iters)
                          : run_baseline(s, m, init));
    if (m == BaselineMode::proposed) proposed_obj = results.back().objective_s;
  }

  auto reduction_pct = [&](double obj) {
    if (!(proposed_obj == proposed_obj) || obj <= 0.0) return 0.0;
    return 100.0 * (1.0 - proposed_obj / obj);
  };

  if (f.format == "csv") {
    std::string out = "mode,objective_s,iterations,reduction_by_proposed_pct\n";
    for (std::size_t i = 0; i < modes.size(); ++i) {
      out += baseline_mode_name(modes[i]);
      out += ',';
      out += format_double(results[i].objective_s);
      out += ',';
      out += std::to_string(results[i].trace.iterations.size());
      out += ',';
      out += format_double(reduction_pct(results[i].objective_s));
      out += '\n';
    }
    emit(f.out_path, out);
  } else {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < modes.size(); ++i) {
      nlohmann::ordered_json j;
      j["mode"] = baseline_mode_name(modes[i]);
      j["objective_s"] = results[i].objective_s;
      j["iterations"] = results[i].trace.iterations.size();
      j["reduction_by_proposed_pct"] = reduction_pct(results[i].objective_s);
      arr.push_back(j);
    }
    emit(f.out_path, arr.dump(2) + "\n");
  }
  return 0;
}

inline int run_sweep_cmd(const CommonFlags& f, const std::string& variable,
                         const std::string& values_csv, int trials) {
  if (f.format != "json" && f.format != "csv") {
    throw std::invalid_argument("unknown format: " + f.format);
  }
  if (!f.scenario_path.empty()) {
    throw std::invalid_argument("sweep regenerates scenarios per trial; "
                                "--scenario is not accepted");
  }
  SweepSpec spec;
  spec.variable = sweep_variable_from_name(variable);
  if (values_csv.empty()) {
    spec.values = default_sweep_values(spec.variable);
  } else {
    std::string_view rest = values_csv;
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view field = rest.substr(0, comma);
      spec.values.push_back(parse_double_field(field));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  spec.trials = trials;
  spec.modes = modes_from_flag(f.mode);

  const std::vector<ResultRow> rows =
      run_sweep(spec, f.params, f.params.seed);
  emit(f.out_path, f.format == "csv" ? sweep_to_csv(rows)
                                     : sweep_to_json(rows).dump(2) + "\n");
  return 0;
}

inline int run_verify(const CommonFlags& f, long samples) {
  const AuditReport report = run_audit(samples, f.params.seed);
  emit(f.out_path, audit_report_to_json(report).dump(2) + "\n");
  return report.overall_pass ? 0 : 1;
}

}  // namespace clidetail

// Entry point shared by the installed binary and in-process tests.
// Exit codes: 0 success, 1 infeasible input or failed verification,
// 2 bad arguments.
inline int cli_main(int argc, char** argv) {
  using namespace clidetail;
  CLI::App app{"delay-optimal hover point, power and bandwidth split for a "
               "THz aerial base station"};
  app.require_subcommand(1);

  CommonFlags f;
  std::string compare_mode = "all";
  std::string sweep_format = "csv";
  std::string variable;
  std::string values_csv;
  int trials = 1;
  long samples = 10000;

  CLI::App* gen = app.add_subcommand(
      "gen", "generate a scenario and write it as JSON");
  add_scenario_flags(gen, f);
  gen->add_option("--out", f.out_path, "output path (stdout when omitted)");

  CLI::App* solve = app.add_subcommand(
      "solve", "run one solver mode on a scenario");
  add_scenario_flags(solve, f);
  solve->add_option("--tol", f.tol, "relative objective tolerance");
  solve->add_option("--max-iters", f.max_iters, "iteration cap");
  solve->add_option("--mode", f.mode, "proposed|ol|op|ow|exh");
  solve->add_option("--out", f.out_path, "output path (stdout when omitted)");
  solve->add_option("--format", f.format, "json|csv");

  CLI::App* compare = app.add_subcommand(
      "compare", "run several modes from the same start and tabulate");
  add_scenario_flags(compare, f);
  compare->add_option("--tol", f.tol, "relative objective tolerance");
  compare->add_option("--max-iters", f.max_iters, "iteration cap");
  compare->add_option("--mode", compare_mode, "proposed|ol|op|ow|exh|all");
  compare->add_option("--out", f.out_path,
                      "output path (stdout when omitted)");
  compare->add_option("--format", f.format, "json|csv");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "re-solve across a parameter grid and aggregate");
  add_scenario_flags(sweep, f);
  sweep->add_option("--variable", variable,
                    "absorption_a|total_bandwidth|num_users|altitude")
      ->required();
  sweep->add_option("--values", values_csv,
                    "comma-separated grid (defaults per variable)");
  sweep->add_option("--trials", trials, "random scenarios per grid value");
  sweep->add_option("--mode", f.mode, "proposed|ol|op|ow|exh|all");
  sweep->add_option("--out", f.out_path, "output path (stdout when omitted)");
  sweep->add_option("--format", sweep_format, "json|csv");

  CLI::App* verify = app.add_subcommand(
      "verify", "run the curvature audit and report claim margins");
  verify->add_option("--samples", samples, "samples per audited claim");
  verify->add_option("--seed", f.params.seed, "audit sampling seed");
  verify->add_option("--out", f.out_path, "output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return run_gen(f);
    if (solve->parsed()) return run_solve(f);
    if (compare->parsed()) {
      f.mode = compare_mode;
      return run_compare(f);
    }
    if (sweep->parsed()) {
      f.format = sweep_format;
      return run_sweep_cmd(f, variable, values_csv, trials);
    }
    if (verify->parsed()) return run_verify(f, samples);
  } catch (const InfeasibleInit& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 1;
  } catch (const EnergyInfeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace thzuav
