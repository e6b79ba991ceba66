#include "aoirate/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

namespace aoirate::cli {

SolveRow run_solve(const RunConfig& config) {
  return SolveRow{config.params, solve(config.params, config.solve)};
}

SimulateRow run_simulate(const RunConfig& config) {
  const PolicySpec policy = parse_policy(config.policy, config.params, config.solve);
  SimulateRow row;
  row.params = config.params;
  row.policy = policy.name();
  row.estimate = simulate(policy, config.params, config.sim.stages, config.sim.warmup, config.sim.seed);
  if (auto threshold = policy.as_threshold()) {
    row.exact_avg_age = avg_age(*threshold, config.params);
  }
  return row;
}

namespace {

constexpr std::size_t kSeriesPerPoint = 4;
const std::array<double, 2> kRandomSeries{0.25, 0.5};

std::vector<SweepRow> sweep_point(const RunConfig& config, std::size_t index, double value) {
  const std::string& name = config.sweep->parameter;
  const SystemParams params = with_parameter(config.params, name, value);
  std::vector<SweepRow> rows;

  const auto base = [&](std::string policy) {
    SweepRow r;
    r.parameter = name;
    r.value = value;
    r.policy = std::move(policy);
    return r;
  };

  try {
    params.validate();
    const SolveResult sol = solve(params, config.solve);

    SweepRow opt = base("age-optimal");
    opt.thresholds = sol.policy;
    opt.avg_age = avg_age(sol.policy, params);
    opt.source = "exact";
    opt.beta_star = sol.beta_star;
    rows.push_back(opt);

    const PolicySpec delay = PolicySpec::delay_optimal(params);
    SweepRow del = base("delay-optimal");
    del.thresholds = delay.as_threshold();
    del.avg_age = avg_age(*del.thresholds, params);
    del.source = "exact";
    del.beta_star = sol.beta_star;
    rows.push_back(del);

    for (std::size_t s = 0; s < kRandomSeries.size(); ++s) {
      const PolicySpec random = PolicySpec::random(kRandomSeries[s]);
      const SimEstimate est = simulate(random, params, config.sim.stages, config.sim.warmup, config.sim.seed,
                                       index * kSeriesPerPoint + s);
      SweepRow r = base(random.name());
      r.avg_age = est.avg_age;
      r.std_err = est.std_err;
      r.source = "simulated";
      r.beta_star = sol.beta_star;
      rows.push_back(r);
    }
  } catch (const std::exception&) {
    rows.clear();
    for (const char* policy : {"age-optimal", "delay-optimal", "random(0.25)", "random(0.5)"}) {
      SweepRow r = base(policy);
      r.avg_age = NAN;
      r.std_err = NAN;
      r.source = "invalid";
      r.beta_star = NAN;
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> run_sweep(const RunConfig& config, std::ostream& warnings) {
  if (!config.sweep) {
    throw ConfigError("sweep requires a 'sweep' section in the config");
  }
  const std::vector<double> grid = config.sweep->grid();
  std::vector<std::future<std::vector<SweepRow>>> jobs;
  jobs.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, sweep_point, std::cref(config), i, grid[i]));
  }
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto point = jobs[i].get();
    if (!point.empty() && point.front().source == "invalid") {
      try {
        with_parameter(config.params, config.sweep->parameter, grid[i]).validate();
      } catch (const ParamError& e) {
        warnings << "warning: skipping " << config.sweep->parameter << "=" << fixed6(grid[i]) << ": " << e.what()
                 << "\n";
      } catch (const std::exception&) {
      }
    }
    rows.insert(rows.end(), point.begin(), point.end());
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.value < b.value; });
  return rows;
}

namespace {

struct Overrides {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> stages;
  std::optional<double> eps1;
  std::optional<double> eps2;
  std::optional<double> d1;
  std::optional<double> d2;
  std::optional<double> p1;
  std::optional<double> p2;
  std::optional<std::string> policy;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file (see --print-schema)");
  cmd->add_option("--out", o.out, "CSV output path");
  cmd->add_option("--seed", o.seed, "simulation seed");
  cmd->add_option("--stages", o.stages, "simulated stages");
  cmd->add_option("--eps1", o.eps1, "bisection width on beta");
  cmd->add_option("--eps2", o.eps2, "golden-section width on y");
  cmd->add_option("--d1", o.d1, "low-rate delay");
  cmd->add_option("--d2", o.d2, "high-rate delay");
  cmd->add_option("--p1", o.p1, "low-rate error probability");
  cmd->add_option("--p2", o.p2, "high-rate error probability");
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (!o.out.empty()) {
    cfg.output = o.out;
  }
  if (o.seed) {
    cfg.sim.seed = *o.seed;
  }
  if (o.stages) {
    cfg.sim.stages = *o.stages;
  }
  if (o.eps1) {
    cfg.solve.eps1 = *o.eps1;
  }
  if (o.eps2) {
    cfg.solve.eps2 = *o.eps2;
  }
  if (o.d1) {
    cfg.params.d1 = *o.d1;
  }
  if (o.d2) {
    cfg.params.d2 = *o.d2;
  }
  if (o.p1) {
    cfg.params.p1 = *o.p1;
  }
  if (o.p2) {
    cfg.params.p2 = *o.p2;
  }
  if (o.policy) {
    cfg.policy = *o.policy;
  }
  cfg.validate();
  return cfg;
}

void emit(const RunConfig& cfg, std::string_view header, const std::vector<std::string>& lines, std::ostream& out) {
  std::ostringstream csv;
  csv << header << '\n';
  for (const auto& line : lines) {
    csv << line << '\n';
  }
  out << csv.str();
  if (!cfg.output.empty()) {
    std::ofstream file(cfg.output, std::ios::binary | std::ios::trunc);
    if (!file) {
      throw ConfigError("cannot write " + cfg.output);
    }
    file << csv.str();
  }
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Age-optimal rate selection for a two-rate unreliable link", "aoi_rate"};
  bool print_schema = false;
  app.add_flag("--print-schema", print_schema, "print the JSON config schema and exit");
  app.require_subcommand(0, 1);

  Overrides o;
  auto* solve_cmd = app.add_subcommand("solve", "optimal threshold policy and average age");
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimate for one policy");
  auto* sweep_cmd = app.add_subcommand("sweep", "policy comparison over a parameter grid");
  auto* verify_cmd = app.add_subcommand("verify", "cross-check solver, closed forms, MDP oracle and simulator");
  for (auto* cmd : {solve_cmd, sim_cmd, sweep_cmd, verify_cmd}) {
    add_common_flags(cmd, o);
  }
  sim_cmd->add_option("--policy", o.policy,
                      "age-optimal | delay-optimal | always-low | always-high | random:<p> | type1:<m>:<k> | "
                      "type2:<m>:<k>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (print_schema) {
    out << config_schema();
    return kExitOk;
  }

  try {
    if (*solve_cmd) {
      const RunConfig cfg = resolve_config(o);
      emit(cfg, kSolveHeader, {csv_row(run_solve(cfg))}, out);
      return kExitOk;
    }
    if (*sim_cmd) {
      const RunConfig cfg = resolve_config(o);
      emit(cfg, kSimulateHeader, {csv_row(run_simulate(cfg))}, out);
      return kExitOk;
    }
    if (*sweep_cmd) {
      const RunConfig cfg = resolve_config(o);
      const auto rows = run_sweep(cfg, err);
      const bool any = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.source != "invalid"; });
      if (!any) {
        err << "error: no valid grid point\n";
        return kExitUsage;
      }
      std::vector<std::string> lines;
      lines.reserve(rows.size());
      for (const auto& r : rows) {
        lines.push_back(csv_row(r));
      }
      emit(cfg, kSweepHeader, lines, out);
      return kExitOk;
    }
    if (*verify_cmd) {
      const RunConfig cfg = resolve_config(o);
      const auto checks = run_verify(cfg);
      std::vector<std::string> lines;
      bool ok = true;
      for (const auto& c : checks) {
        lines.push_back(csv_row(c));
        ok = ok && (c.passed || c.informational);
      }
      emit(cfg, kVerifyHeader, lines, out);
      return ok ? kExitOk : kExitVerifyFailed;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  err << app.help();
  return kExitUsage;
}

}  // namespace aoirate::cli
