#include "aoirate/cli.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aoirate::cli {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxGridPoints = 100000;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) {
      known = known || key == a;
    }
    if (!known) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

const json& object_at(const json& root, const char* key) {
  const json& v = root.at(key);
  if (!v.is_object()) {
    throw ConfigError(std::string("'") + key + "' must be an object");
  }
  return v;
}

double number_at(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError(where + "." + key + " must be a number");
  }
  return v.get<double>();
}

std::uint64_t count_at(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace

std::vector<double> SweepSpec::grid() const {
  std::vector<double> out;
  if (!(step > 0.0) || !(to >= from)) {
    return out;
  }
  const double span = (to - from) / step;
  const auto n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(from + static_cast<double>(i) * step);
  }
  return out;
}

void RunConfig::validate() const {
  try {
    params.validate();
    solve.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (sim.stages <= sim.warmup) {
    throw ConfigError("sim.stages > sim.warmup violated");
  }
  if (sweep) {
    const auto& s = *sweep;
    if (s.parameter != "p1" && s.parameter != "p2" && s.parameter != "d1" && s.parameter != "d2") {
      throw ConfigError("sweep.parameter must be one of p1, p2, d1, d2");
    }
    if (!std::isfinite(s.from) || !std::isfinite(s.to) || !std::isfinite(s.step)) {
      throw ConfigError("sweep bounds must be finite");
    }
    if (!(s.step > 0.0)) {
      throw ConfigError("sweep.step > 0 violated");
    }
    if (!(s.to >= s.from)) {
      throw ConfigError("sweep range non-empty (to >= from) violated");
    }
    if ((s.to - s.from) / s.step >= static_cast<double>(kMaxGridPoints)) {
      throw ConfigError("sweep grid exceeds 100000 points");
    }
  }
}

RunConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  reject_unknown(root, {"params", "solve", "sim", "sweep", "policy", "output"}, "config");

  RunConfig cfg;
  try {
    if (root.contains("params")) {
      const json& p = object_at(root, "params");
      reject_unknown(p, {"d1", "d2", "p1", "p2"}, "params");
      cfg.params = p.get<SystemParams>();
    }
    if (root.contains("solve")) {
      const json& s = object_at(root, "solve");
      reject_unknown(s, {"eps1", "eps2", "m_max"}, "solve");
      if (s.contains("eps1")) {
        cfg.solve.eps1 = number_at(s, "eps1", "solve");
      }
      if (s.contains("eps2")) {
        cfg.solve.eps2 = number_at(s, "eps2", "solve");
      }
      if (s.contains("m_max")) {
        const auto m = count_at(s, "m_max", "solve");
        if (m > 1'000'000) {
          throw ConfigError("solve.m_max <= 1000000 violated");
        }
        cfg.solve.m_max = static_cast<int>(m);
      }
    }
    if (root.contains("sim")) {
      const json& s = object_at(root, "sim");
      reject_unknown(s, {"stages", "warmup", "seed"}, "sim");
      if (s.contains("stages")) {
        cfg.sim.stages = count_at(s, "stages", "sim");
      }
      if (s.contains("warmup")) {
        cfg.sim.warmup = count_at(s, "warmup", "sim");
      }
      if (s.contains("seed")) {
        cfg.sim.seed = count_at(s, "seed", "sim");
      }
    }
    if (root.contains("sweep")) {
      const json& s = object_at(root, "sweep");
      reject_unknown(s, {"parameter", "from", "to", "step"}, "sweep");
      SweepSpec spec;
      if (!s.at("parameter").is_string()) {
        throw ConfigError("sweep.parameter must be a string");
      }
      spec.parameter = s.at("parameter").get<std::string>();
      spec.from = number_at(s, "from", "sweep");
      spec.to = number_at(s, "to", "sweep");
      spec.step = number_at(s, "step", "sweep");
      cfg.sweep = spec;
    }
    if (root.contains("policy")) {
      if (!root.at("policy").is_string()) {
        throw ConfigError("policy must be a string");
      }
      cfg.policy = root.at("policy").get<std::string>();
    }
    if (root.contains("output")) {
      if (!root.at("output").is_string()) {
        throw ConfigError("output must be a string");
      }
      cfg.output = root.at("output").get<std::string>();
    }
  } catch (const json::out_of_range& e) {
    throw ConfigError(std::string("missing key: ") + e.what());
  } catch (const ParamError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read config file " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string config_schema() {
  return R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "aoi_rate run configuration",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "params": {
      "description": "Link parameters; defaults to d1=10, d2=8, p1=0.4, p2=0.75",
      "type": "object",
      "additionalProperties": false,
      "required": ["d1", "d2", "p1", "p2"],
      "properties": {
        "d1": {"type": "number", "description": "low-rate delay, d1 > d2"},
        "d2": {"type": "number", "description": "high-rate delay, d2 > 0"},
        "p1": {"type": "number", "description": "low-rate error probability, 0 < p1 <= p2"},
        "p2": {"type": "number", "description": "high-rate error probability, p2 < 1"}
      }
    },
    "solve": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "eps1": {"type": "number", "exclusiveMinimum": 0, "description": "bisection width on beta, default 1e-6 * d2"},
        "eps2": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "default": 1e-4},
        "m_max": {"type": "integer", "minimum": 1, "maximum": 1000000, "default": 10000}
      }
    },
    "sim": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "stages": {"type": "integer", "minimum": 1, "default": 1000000},
        "warmup": {"type": "integer", "minimum": 0, "default": 10000, "description": "must be below stages"},
        "seed": {"type": "integer", "minimum": 0, "default": 1}
      }
    },
    "sweep": {
      "type": "object",
      "additionalProperties": false,
      "required": ["parameter", "from", "to", "step"],
      "properties": {
        "parameter": {"enum": ["p1", "p2", "d1", "d2"]},
        "from": {"type": "number"},
        "to": {"type": "number", "description": "to >= from"},
        "step": {"type": "number", "exclusiveMinimum": 0}
      }
    },
    "policy": {
      "type": "string",
      "default": "age-optimal",
      "description": "simulate only: age-optimal | delay-optimal | always-low | always-high | random:<p> | type1:<m>:<k> | type2:<m>:<k>"
    },
    "output": {"type": "string", "description": "CSV path, same as --out"}
  }
}
)";
}

PolicySpec parse_policy(const std::string& text, const SystemParams& params, const SolveConfig& solve_cfg) {
  if (text == "age-optimal") {
    return PolicySpec::threshold(aoirate::solve(params, solve_cfg).policy);
  }
  if (text == "delay-optimal") {
    return PolicySpec::delay_optimal(params);
  }
  if (text == "always-low") {
    return PolicySpec::always_low();
  }
  if (text == "always-high") {
    return PolicySpec::always_high();
  }
  const auto bad = [&] { return ConfigError("unrecognized policy '" + text + "'"); };
  if (text.rfind("random:", 0) == 0) {
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(text.substr(7), &used);
    } catch (const std::exception&) {
      throw bad();
    }
    if (used != text.size() - 7) {
      throw bad();
    }
    try {
      return PolicySpec::random(p);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  const bool t1 = text.rfind("type1:", 0) == 0;
  const bool t2 = text.rfind("type2:", 0) == 0;
  if (!t1 && !t2) {
    throw bad();
  }
  int m = 0;
  int k = 0;
  char tail = 0;
  if (std::sscanf(text.c_str() + 6, "%d:%d%c", &m, &k, &tail) != 2) {
    throw bad();
  }
  const ThresholdPolicy policy = t1 ? ThresholdPolicy::type1(m, k) : ThresholdPolicy::type2(m, k);
  try {
    policy.validate(params);
  } catch (const PolicyError& e) {
    throw ConfigError(e.what());
  }
  return PolicySpec::threshold(policy);
}

std::string fixed6(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") {
    s = "0.000000";
  }
  return s;
}

SystemParams with_parameter(SystemParams params, const std::string& name, double value) {
  if (name == "d1") {
    params.d1 = value;
  } else if (name == "d2") {
    params.d2 = value;
  } else if (name == "p1") {
    params.p1 = value;
  } else if (name == "p2") {
    params.p2 = value;
  } else {
    throw ConfigError("unknown parameter '" + name + "'");
  }
  return params;
}

namespace {

std::string params_cells(const SystemParams& p) {
  return fixed6(p.d1) + "," + fixed6(p.d2) + "," + fixed6(p.p1) + "," + fixed6(p.p2);
}

}  // namespace

std::string csv_row(const SolveRow& row) {
  const auto& r = row.result;
  return params_cells(row.params) + "," + std::string(to_string(r.regime)) + "," +
         std::string(to_string(r.policy.family)) + "," + std::to_string(r.policy.m) + "," +
         std::to_string(r.policy.n()) + "," + fixed6(r.beta_star) + "," + std::to_string(r.iterations);
}

std::string csv_row(const SimulateRow& row) {
  const auto& e = row.estimate;
  return params_cells(row.params) + "," + row.policy + "," + fixed6(e.avg_age) + "," + fixed6(e.std_err) + "," +
         fixed6(row.exact_avg_age.value_or(NAN)) + "," + std::to_string(e.stages + e.warmup_stages) + "," +
         std::to_string(e.warmup_stages) + "," + std::to_string(e.seed);
}

std::string csv_row(const SweepRow& row) {
  std::string m;
  std::string n;
  if (row.thresholds) {
    m = std::to_string(row.thresholds->m);
    n = std::to_string(row.thresholds->n());
  }
  return row.parameter + "," + fixed6(row.value) + "," + row.policy + "," + m + "," + n + "," + fixed6(row.avg_age) +
         "," + fixed6(row.std_err) + "," + row.source + "," + fixed6(row.beta_star);
}

std::string csv_row(const VerifyCheck& check) {
  const char* status = check.informational ? "info" : (check.passed ? "pass" : "FAIL");
  char measured[32];
  char bound[32];
  std::snprintf(measured, sizeof measured, "%.3e", check.measured);
  std::snprintf(bound, sizeof bound, "%.3e", check.bound);
  return check.name + "," + status + "," + measured + "," + bound + "," + check.detail;
}

}  // namespace aoirate::cli
