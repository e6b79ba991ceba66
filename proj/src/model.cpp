#include "aoirate/model.hpp"

#include <algorithm>
#include <cmath>

namespace aoirate {

std::string_view to_string(Rate rate) { return rate == Rate::Low ? "low" : "high"; }

std::string_view to_string(Regime regime) {
  return regime == Regime::Mixed ? "Mixed" : "HighDominant";
}

void SystemParams::validate() const {
  if (!(std::isfinite(d1) && std::isfinite(d2) && std::isfinite(p1) && std::isfinite(p2))) {
    throw ParamError("parameters must be finite");
  }
  if (!(d2 > 0.0)) {
    throw ParamError("d2 > 0 violated");
  }
  if (!(d1 > d2)) {
    throw ParamError("d1 > d2 violated");
  }
  if (!(p1 > 0.0)) {
    throw ParamError("p1 > 0 violated");
  }
  if (!(p2 >= p1)) {
    throw ParamError("p1 <= p2 violated");
  }
  if (!(p2 < 1.0)) {
    throw ParamError("p2 < 1 violated");
  }
}

SystemParams make_params(double d1, double d2, double p1, double p2) {
  SystemParams params{d1, d2, p1, p2};
  params.validate();
  return params;
}

double mean_delay(const SystemParams& params, Rate rate) {
  return params.delay(rate) / (1.0 - params.error_prob(rate));
}

Regime classify_regime(const SystemParams& params) {
  const double lhs = params.d1 * (1.0 - params.p2);
  const double rhs = params.d2 * (1.0 - params.p1);
  const double tol = 1e-12 * std::max(params.d1, params.d2);
  return lhs < rhs - tol ? Regime::Mixed : Regime::HighDominant;
}

double stage_cost(double age, Rate rate, double beta, const SystemParams& params) {
  const double d = params.delay(rate);
  return (age - beta) * d + 0.5 * d * d;
}

double always_rate_age(const SystemParams& params, Rate rate) {
  return (1.0 / (1.0 - params.error_prob(rate)) + 0.5) * params.delay(rate);
}

BetaBounds beta_bounds(const SystemParams& params) {
  params.validate();
  return BetaBounds{1.5 * params.d2,
                    std::min(always_rate_age(params, Rate::Low), always_rate_age(params, Rate::High))};
}

void to_json(nlohmann::json& j, const SystemParams& params) {
  j = nlohmann::json{{"d1", params.d1}, {"d2", params.d2}, {"p1", params.p1}, {"p2", params.p2}};
}

void from_json(const nlohmann::json& j, SystemParams& params) {
  if (!j.is_object()) {
    throw ParamError("params must be a JSON object");
  }
  for (const char* key : {"d1", "d2", "p1", "p2"}) {
    if (!j.contains(key)) {
      throw ParamError(std::string("missing parameter '") + key + "'");
    }
    if (!j.at(key).is_number()) {
      throw ParamError(std::string("parameter '") + key + "' must be a number");
    }
  }
  SystemParams parsed{j.at("d1").get<double>(), j.at("d2").get<double>(), j.at("p1").get<double>(),
                      j.at("p2").get<double>()};
  parsed.validate();
  params = parsed;
}

}  // namespace aoirate
