#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "thzuav/optimizer.hpp"
#include "thzuav/scenario_io.hpp"

namespace thzuav {

enum class SweepVariable { absorption_a, total_bandwidth, num_users, altitude };

inline const char* sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::absorption_a: return "absorption_a";
    case SweepVariable::total_bandwidth: return "total_bandwidth";
    case SweepVariable::num_users: return "num_users";
    case SweepVariable::altitude: return "altitude";
  }
  throw std::logic_error("sweep_variable_name: unknown variable");
}

inline SweepVariable sweep_variable_from_name(std::string_view name) {
  if (name == "absorption_a") return SweepVariable::absorption_a;
  if (name == "total_bandwidth") return SweepVariable::total_bandwidth;
  if (name == "num_users") return SweepVariable::num_users;
  if (name == "altitude") return SweepVariable::altitude;
  throw std::invalid_argument("unknown sweep variable: " + std::string(name));
}

inline BaselineMode baseline_mode_from_name(std::string_view name) {
  if (name == "proposed") return BaselineMode::proposed;
  if (name == "ol") return BaselineMode::ol;
  if (name == "op") return BaselineMode::op;
  if (name == "ow") return BaselineMode::ow;
  if (name == "exh") return BaselineMode::exh;
  throw std::invalid_argument("unknown mode: " + std::string(name));
}

inline std::vector<double> default_sweep_values(SweepVariable v) {
  switch (v) {
    case SweepVariable::absorption_a:
      return {0.0025, 0.005, 0.0075, 0.01, 0.0125};
    case SweepVariable::total_bandwidth:
      return {6e10, 8e10, 1e11, 1.2e11, 1.4e11};
    case SweepVariable::num_users:
      return {4, 8, 12, 16, 20};
    case SweepVariable::altitude:
      return {10, 20, 30};
  }
  throw std::logic_error("default_sweep_values: unknown variable");
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::absorption_a;
  std::vector<double> values;  // nonempty, strictly increasing
  int trials = 1;
  std::vector<BaselineMode> modes;  // nonempty
};

struct ResultRow {
  std::string variable;
  double value = 0.0;
  std::string mode;
  double mean_delay_s = 0.0;
  double min_delay_s = 0.0;
  double max_delay_s = 0.0;
  double mean_iters = 0.0;
  int trials = 0;
  int infeasible_trials = 0;
};

namespace sweepdetail {

inline ScenarioParams with_value(ScenarioParams params, SweepVariable v,
                                 double value) {
  switch (v) {
    case SweepVariable::absorption_a: params.absorption = value; break;
    case SweepVariable::total_bandwidth: params.total_bandwidth = value; break;
    case SweepVariable::num_users: params.n_users = int(value); break;
    case SweepVariable::altitude: params.altitude = value; break;
  }
  return params;
}

struct Accum {
  double sum_delay = 0.0;
  double min_delay = std::numeric_limits<double>::infinity();
  double max_delay = -std::numeric_limits<double>::infinity();
  double sum_iters = 0.0;
  int feasible = 0;
  int infeasible = 0;
};

}  // namespace sweepdetail

// Runs every mode on the same freshly generated scenario for each
// (value, trial) pair; trial t uses seed + t. Trials whose setup or
// solve proves infeasible are counted and left out of the statistics.
inline std::vector<ResultRow> run_sweep(const SweepSpec& spec,
                                        const ScenarioParams& base,
                                        std::uint64_t seed) {
  if (spec.values.empty()) {
    throw std::invalid_argument("run_sweep: values must be nonempty");
  }
  for (std::size_t i = 1; i < spec.values.size(); ++i) {
    if (!(spec.values[i] > spec.values[i - 1])) {
      throw std::invalid_argument("run_sweep: values must be strictly "
                                  "increasing");
    }
  }
  if (spec.trials < 1) {
    throw std::invalid_argument("run_sweep: trials must be at least 1");
  }
  if (spec.modes.empty()) {
    throw std::invalid_argument("run_sweep: modes must be nonempty");
  }
  if (spec.variable == SweepVariable::num_users) {
    for (double v : spec.values) {
      if (v < 1.0 || v != std::floor(v)) {
        throw std::invalid_argument("run_sweep: num_users values must be "
                                    "positive integers");
      }
    }
  }

  std::vector<ResultRow> rows;
  for (double value : spec.values) {
    std::vector<sweepdetail::Accum> acc(spec.modes.size());
    for (int trial = 0; trial < spec.trials; ++trial) {
      ScenarioParams params =
          sweepdetail::with_value(base, spec.variable, value);
      params.seed = seed + std::uint64_t(trial);
      const Scenario s = generate_scenario(params);

      bool have_init = true;
      Decision init;
      try {
        init = make_initial_decision(s);
      } catch (const InfeasibleInit&) {
        have_init = false;
      } catch (const EnergyInfeasible&) {
        have_init = false;
      }

      for (std::size_t m = 0; m < spec.modes.size(); ++m) {
        if (!have_init) {
          ++acc[m].infeasible;
          continue;
        }
        try {
          const OptimizeResult res = run_baseline(s, spec.modes[m], init);
          acc[m].sum_delay += res.objective_s;
          acc[m].min_delay = std::min(acc[m].min_delay, res.objective_s);
          acc[m].max_delay = std::max(acc[m].max_delay, res.objective_s);
          acc[m].sum_iters += double(res.trace.iterations.size());
          ++acc[m].feasible;
        } catch (const InfeasibleInit&) {
          ++acc[m].infeasible;
        } catch (const EnergyInfeasible&) {
          ++acc[m].infeasible;
        }
      }
    }

    for (std::size_t m = 0; m < spec.modes.size(); ++m) {
      ResultRow row;
      row.variable = sweep_variable_name(spec.variable);
      row.value = value;
      row.mode = baseline_mode_name(spec.modes[m]);
      row.trials = spec.trials;
      row.infeasible_trials = acc[m].infeasible;
      if (acc[m].feasible > 0) {
        row.mean_delay_s = acc[m].sum_delay / acc[m].feasible;
        row.min_delay_s = acc[m].min_delay;
        row.max_delay_s = acc[m].max_delay;
        row.mean_iters = acc[m].sum_iters / acc[m].feasible;
      } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.mean_delay_s = nan;
        row.min_delay_s = nan;
        row.max_delay_s = nan;
        row.mean_iters = nan;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double_field(std::string_view field) {
  double out = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(),
                                   out);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw std::invalid_argument("bad numeric field: " + std::string(field));
  }
  return out;
}

inline constexpr const char* kSweepCsvHeader =
    "variable,value,mode,mean_delay_s,min_delay_s,max_delay_s,mean_iters,"
    "trials,infeasible_trials";

inline std::string sweep_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  for (const ResultRow& r : rows) {
    out += r.variable;
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += r.mode;
    out += ',';
    out += format_double(r.mean_delay_s);
    out += ',';
    out += format_double(r.min_delay_s);
    out += ',';
    out += format_double(r.max_delay_s);
    out += ',';
    out += format_double(r.mean_iters);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += std::to_string(r.infeasible_trials);
    out += '\n';
  }
  return out;
}

inline std::vector<ResultRow> sweep_from_csv(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest = text;
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    if (nl == std::string_view::npos) {
      throw std::invalid_argument("sweep_from_csv: missing final newline");
    }
    lines.push_back(rest.substr(0, nl));
    rest = rest.substr(nl + 1);
  }
  if (lines.empty() || lines[0] != kSweepCsvHeader) {
    throw std::invalid_argument("sweep_from_csv: bad header");
  }

  std::vector<ResultRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string_view> fields;
    std::string_view line = lines[i];
    while (true) {
      const std::size_t comma = line.find(',');
      if (comma == std::string_view::npos) {
        fields.push_back(line);
        break;
      }
      fields.push_back(line.substr(0, comma));
      line = line.substr(comma + 1);
    }
    if (fields.size() != 9) {
      throw std::invalid_argument("sweep_from_csv: wrong field count");
    }
    ResultRow r;
    r.variable = std::string(fields[0]);
    r.value = parse_double_field(fields[1]);
    r.mode = std::string(fields[2]);
    r.mean_delay_s = parse_double_field(fields[3]);
    r.min_delay_s = parse_double_field(fields[4]);
    r.max_delay_s = parse_double_field(fields[5]);
    r.mean_iters = parse_double_field(fields[6]);
    r.trials = int(parse_double_field(fields[7]));
    r.infeasible_trials = int(parse_double_field(fields[8]));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline nlohmann::ordered_json sweep_to_json(const std::vector<ResultRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ResultRow& r : rows) {
    nlohmann::ordered_json j;
    j["variable"] = r.variable;
    j["value"] = r.value;
    j["mode"] = r.mode;
    j["mean_delay_s"] = r.mean_delay_s;
    j["min_delay_s"] = r.min_delay_s;
    j["max_delay_s"] = r.max_delay_s;
    j["mean_iters"] = r.mean_iters;
    j["trials"] = r.trials;
    j["infeasible_trials"] = r.infeasible_trials;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace thzuav
