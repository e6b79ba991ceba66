#include "aoirate/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace aoirate {

namespace {

constexpr double kTau = 0.6180339887498949;  // (sqrt(5) - 1) / 2

// log_p2(y), snapped onto an integer when rounding put it within 1e-9 of one
double threshold_log(double y, double p2) {
  const double raw = std::log(y) / std::log(p2);
  const double nearest = std::round(raw);
  return std::abs(raw - nearest) < 1e-9 ? nearest : raw;
}

int clamp_m(double m, int m_max) {
  if (!(m > 0.0)) {
    return 0;
  }
  return m >= static_cast<double>(m_max) ? m_max : static_cast<int>(m);
}

}  // namespace

void SolveConfig::validate() const {
  if (eps1 && !(*eps1 > 0.0)) {
    throw std::invalid_argument("eps1 must be positive");
  }
  if (!(eps2 > 0.0 && eps2 < 1.0)) {
    throw std::invalid_argument("eps2 must lie in (0, 1)");
  }
  if (m_max < 1) {
    throw std::invalid_argument("m_max must be at least 1");
  }
}

YBracket golden_section_min(int k1, double beta, const SystemParams& params, double eps2) {
  if (dJ1_dy(1.0, k1, beta, params) < 0.0) {
    return {1.0, 1.0, true};
  }
  auto cost = [&](double y) { return j1_cost(y, k1, beta, params); };
  double lo = 0.0;
  double hi = 1.0;
  double left = hi - (hi - lo) * kTau;
  double right = lo + (hi - lo) * kTau;
  while (params.p2 * hi >= lo && hi - lo > eps2) {
    if (cost(left) > cost(right)) {
      lo = left;
    } else {
      hi = right;
    }
    left = hi - (hi - lo) * kTau;
    right = lo + (hi - lo) * kTau;
  }
  return {lo, hi, false};
}

int integerize(double y_lo, double y_hi, int k1, double beta, const SystemParams& params, int m_max) {
  const int first = clamp_m(std::floor(threshold_log(y_hi, params.p2)), m_max);
  const int last = y_lo > 0.0 ? clamp_m(std::ceil(threshold_log(y_lo, params.p2)), m_max) : m_max;

  auto cost = [&](int m) { return avg_cost(ThresholdPolicy::type2(m, k1), beta, params); };
  int best_m = first;
  double best = cost(first);
  // the cost is unimodal in m, so a wide window stops at the first strict rise
  double prev = best;
  for (int m = first + 1; m <= last; ++m) {
    const double c = cost(m);
    if (c < best) {
      best = c;
      best_m = m;
    }
    if (c > prev && last - first > 2) {
      break;
    }
    prev = c;
  }
  return best_m;
}

PBeta p_of_beta(double beta, const SystemParams& params, const SolveConfig& config) {
  if (classify_regime(params) == Regime::HighDominant) {
    const auto policy = ThresholdPolicy::always_high();
    return {avg_cost(policy, beta, params), policy};
  }

  PBeta best{avg_cost(ThresholdPolicy::type2(0, 0), beta, params), ThresholdPolicy::type2(0, 0)};
  const int k_max = max_type2_offset(params);
  for (int k1 = 0; k1 <= k_max; ++k1) {
    const YBracket bracket = golden_section_min(k1, beta, params, config.eps2);
    const int m = bracket.at_boundary
                      ? 0
                      : integerize(bracket.y_lo, bracket.y_hi, k1, beta, params, config.m_max);
    const auto candidate = ThresholdPolicy::type2(m, k1);
    const double value = avg_cost(candidate, beta, params);
    if (value <= best.value) {
      best = {value, candidate};
    }
  }
  return best;
}

SolveResult solve(const SystemParams& params, const SolveConfig& config) {
  params.validate();
  config.validate();
  const double eps1 = config.resolved_eps1(params);
  const auto bounds = beta_bounds(params);

  SolveResult result;
  result.regime = classify_regime(params);

  double lo = bounds.beta_min;
  double hi = bounds.beta_max;
  const int cap = static_cast<int>(std::ceil(std::log2(std::max((hi - lo) / eps1, 1.0)))) + 5;
  while (hi - lo > eps1) {
    if (result.iterations >= cap) {
      throw ConvergenceError("bisection on beta did not converge");
    }
    const double beta = 0.5 * (lo + hi);
    const double p = p_of_beta(beta, params, config).value;
    if (config.record_trace) {
      result.p_beta_trace.push_back({beta, p});
    }
    if (p >= 0.0) {
      lo = beta;
    } else {
      hi = beta;
    }
    ++result.iterations;
  }

  result.beta_star = 0.5 * (lo + hi);
  const PBeta at_star = p_of_beta(result.beta_star, params, config);
  result.policy = at_star.argmin;
  result.p_at_star = at_star.value;
  return result;
}

}  // namespace aoirate
