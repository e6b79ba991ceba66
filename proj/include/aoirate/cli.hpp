#pragma once

#include "aoirate/model.hpp"
#include "aoirate/optimizer.hpp"
#include "aoirate/simulator.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aoirate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct SimSettings {
  std::uint64_t stages = 1'000'000;
  std::uint64_t warmup = 10'000;
  std::uint64_t seed = 1;
};

struct SweepSpec {
  std::string parameter = "p1";
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;

  /// Grid values from, from + step, ... up to `to` (inclusive within rounding).
  [[nodiscard]] std::vector<double> grid() const;
};

struct RunConfig {
  SystemParams params{10.0, 8.0, 0.4, 0.75};
  SolveConfig solve;
  SimSettings sim;
  std::optional<SweepSpec> sweep;
  /// Policy run by `simulate`; see parse_policy for the accepted forms.
  std::string policy = "age-optimal";
  std::string output;

  /// Throws ConfigError naming the violated invariant.
  void validate() const;
};

/// Parses a JSON document. Unknown keys are rejected.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);
std::string config_schema();

/// age-optimal | delay-optimal | always-low | always-high | random:<p> | type1:<m>:<k> | type2:<m>:<k>
PolicySpec parse_policy(const std::string& text, const SystemParams& params, const SolveConfig& solve);

/// Fixed-point with 6 decimals; NaN prints as "nan".
std::string fixed6(double value);

SystemParams with_parameter(SystemParams params, const std::string& name, double value);

struct SolveRow {
  SystemParams params;
  SolveResult result;
};

struct SimulateRow {
  SystemParams params;
  std::string policy;
  SimEstimate estimate;
  std::optional<double> exact_avg_age;
};

struct SweepRow {
  std::string parameter;
  double value = 0.0;
  std::string policy;
  std::optional<ThresholdPolicy> thresholds;
  double avg_age = 0.0;
  double std_err = 0.0;
  /// "exact", "simulated" or "invalid".
  std::string source;
  double beta_star = 0.0;
};

struct VerifyCheck {
  std::string name;
  bool passed = true;
  bool informational = false;
  double measured = 0.0;
  double bound = 0.0;
  std::string detail;
};

SolveRow run_solve(const RunConfig& config);
SimulateRow run_simulate(const RunConfig& config);
/// Rows sorted by grid value, then by series order. Invalid grid points yield NaN rows.
std::vector<SweepRow> run_sweep(const RunConfig& config, std::ostream& warnings);
std::vector<VerifyCheck> run_verify(const RunConfig& config);

inline constexpr std::string_view kSolveHeader = "d1,d2,p1,p2,regime,policy,m,n,beta_star,iterations";
inline constexpr std::string_view kSimulateHeader =
    "d1,d2,p1,p2,policy,avg_age,std_err,exact_avg_age,stages,warmup,seed";
inline constexpr std::string_view kSweepHeader = "param,value,policy,m,n,avg_age,std_err,source,beta_star";
inline constexpr std::string_view kVerifyHeader = "check,status,measured,bound,detail";

std::string csv_row(const SolveRow& row);
std::string csv_row(const SimulateRow& row);
std::string csv_row(const SweepRow& row);
std::string csv_row(const VerifyCheck& check);

/// Entry point of the aoi_rate binary; returns 0, 1 or 2.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace aoirate::cli
