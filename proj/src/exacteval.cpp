#include "aoirate/exacteval.hpp"

#include "aoirate/dual.hpp"

#include <cmath>
#include <limits>

namespace aoirate {

std::string_view to_string(PolicyFamily family) {
  switch (family) {
    case PolicyFamily::Type2: return "type2";
    case PolicyFamily::Type1: return "type1";
    case PolicyFamily::AlwaysLow: return "always-low";
    case PolicyFamily::AlwaysHigh: return "always-high";
  }
  return "unknown";
}

ThresholdPolicy ThresholdPolicy::canonical() const {
  switch (family) {
    case PolicyFamily::AlwaysLow: return type2(0, 0);
    case PolicyFamily::AlwaysHigh: return type1(0, 0);
    default: return *this;
  }
}

Rate ThresholdPolicy::below_rate() const {
  return canonical().family == PolicyFamily::Type2 ? Rate::High : Rate::Low;
}

Rate ThresholdPolicy::above_rate() const {
  return below_rate() == Rate::High ? Rate::Low : Rate::High;
}

Rate threshold_action(const ThresholdPolicy& policy, const AgeState& state) {
  const ThresholdPolicy canon = policy.canonical();
  const Rate below = canon.below_rate();
  const std::uint64_t below_count = below == Rate::High ? state.high_count : state.low_count;
  const std::uint64_t above_count = below == Rate::High ? state.low_count : state.high_count;
  const bool below_phase =
      above_count == 0 && below_count < static_cast<std::uint64_t>(canon.threshold(state.root));
  return below_phase ? below : canon.above_rate();
}

int max_type2_offset(const SystemParams& params) {
  return static_cast<int>(std::floor(params.d1 / params.d2));
}

void ThresholdPolicy::validate(const SystemParams& params) const {
  if (m < 0 || k < 0) {
    throw PolicyError("thresholds must be non-negative: " + to_string(*this));
  }
  if ((family == PolicyFamily::AlwaysLow || family == PolicyFamily::AlwaysHigh) && (m != 0 || k != 0)) {
    throw PolicyError("constant policies carry no thresholds: " + to_string(*this));
  }
  if (family == PolicyFamily::Type2 && k > max_type2_offset(params)) {
    throw PolicyError("type2 offset k must be <= floor(d1/d2): " + to_string(*this));
  }
  if (family == PolicyFamily::Type1 && k > 1) {
    throw PolicyError("type1 offset k must be 0 or 1: " + to_string(*this));
  }
}

std::string to_string(const ThresholdPolicy& policy) {
  if (policy.family == PolicyFamily::AlwaysLow || policy.family == PolicyFamily::AlwaysHigh) {
    return std::string(to_string(policy.family));
  }
  return std::string(to_string(policy.family)) + "(m=" + std::to_string(policy.m) +
         ",n=" + std::to_string(policy.n()) + ")";
}

double GeometricSegment::mass_at(std::int64_t l) const {
  if (l < 0 || (length && l >= *length)) {
    return 0.0;
  }
  return scale * std::pow(ratio, static_cast<double>(l));
}

double GeometricSegment::total_mass() const {
  const double tail = length ? std::pow(ratio, static_cast<double>(*length)) : 0.0;
  return scale * (1.0 - tail) / (1.0 - ratio);
}

double SteadyState::total_mass() const {
  double total = 0.0;
  for (const auto& seg : segments) {
    total += seg.total_mass();
  }
  return total;
}

namespace {

// One geometric run of states. `length` and `ratio_pow_length` are only read
// when `infinite` is false; T is double or Dual (for thresholds that vary
// continuously with y).
template <class T>
struct Run {
  Rate root;
  Rate rate;
  T first_age;
  double step;
  T scale;
  double ratio;
  T length;
  T ratio_pow_length;
  bool infinite;
};

template <class T>
struct Totals {
  T mass{};
  T delay{};
  T area{};  // sum of w * (age * d + d^2 / 2)
};

template <class T>
void accumulate(const Run<T>& run, const SystemParams& params, Totals<T>& out) {
  const double r = run.ratio;
  const double one_minus = 1.0 - r;
  const T rt = run.infinite ? T(0.0) : run.ratio_pow_length;
  const T t_rt = run.infinite ? T(0.0) : run.length * rt;
  // sum_{l<t} r^l and sum_{l<t} l r^l, valid for real t
  const T s0 = (1.0 - rt) / one_minus;
  const T s1 = (r - t_rt + (t_rt - rt) * r) / (one_minus * one_minus);
  const double d = params.delay(run.rate);
  out.mass = out.mass + run.scale * s0;
  out.delay = out.delay + run.scale * d * s0;
  out.area = out.area + run.scale * ((run.first_age * d + 0.5 * d * d) * s0 + d * run.step * s1);
}

// Chain induced by a threshold policy whose below-threshold rate is `below`.
// Rooted at `below`, the chain has `t_below` below-threshold states (pow_below =
// p_below^t_below); rooted at the other rate, `t_other` states.
template <class T>
std::array<Run<T>, 4> build_runs(Rate below, T t_below, T pow_below, T t_other, T pow_other,
                                 bool other_empty, const SystemParams& params) {
  const Rate above = below == Rate::High ? Rate::Low : Rate::High;
  const double d_below = params.delay(below);
  const double d_above = params.delay(above);
  const double p_below = params.error_prob(below);
  const double p_above = params.error_prob(above);

  // Balance at the two entry states: w_below * pow_below = w_other * (1 - pow_other).
  // With t_other = 0 the below-rooted chain is never entered.
  T w_below = other_empty ? T(0.0) : 1.0 - pow_other;
  T w_other = other_empty ? T(1.0) : pow_below;

  return {Run<T>{below, below, T(d_below), d_below, w_below, p_below, t_below, pow_below, false},
          Run<T>{below, above, d_below + t_below * d_below, d_above, w_below * pow_below, p_above, T(0.0),
                 T(0.0), true},
          Run<T>{above, below, T(d_above), d_below, w_other, p_below, t_other, pow_other, false},
          Run<T>{above, above, d_above + t_other * d_below, d_above, w_other * pow_other, p_above, T(0.0),
                 T(0.0), true}};
}

std::array<Run<double>, 4> integer_runs(const ThresholdPolicy& policy, const SystemParams& params) {
  if (policy.m < 0 || policy.k < 0) {
    throw PolicyError("thresholds must be non-negative: " + to_string(policy));
  }
  const ThresholdPolicy canon = policy.canonical();
  const Rate below = canon.below_rate();
  const Rate above = canon.above_rate();
  const double p_below = params.error_prob(below);
  const int t_below = canon.threshold(below);
  const int t_other = canon.threshold(above);
  return build_runs<double>(below, t_below, std::pow(p_below, t_below), t_other, std::pow(p_below, t_other),
                            t_other == 0, params);
}

template <class T>
Totals<T> totals_of(const std::array<Run<T>, 4>& runs, const SystemParams& params) {
  Totals<T> totals;
  for (const auto& run : runs) {
    accumulate(run, params, totals);
  }
  const double mass = value_of(totals.mass);
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw PolicyError("threshold policy induces no recurrent class");
  }
  return totals;
}

Totals<double> integer_totals(const ThresholdPolicy& policy, const SystemParams& params) {
  return totals_of(integer_runs(policy, params), params);
}

template <class T>
T j1_generic(T y, int k1, double beta, const SystemParams& params) {
  using std::log;
  const double q = std::pow(params.p2, k1);
  const T m = log(y) / std::log(params.p2);
  const auto runs = build_runs<T>(Rate::High, m + static_cast<double>(k1), y * q, m, y, false, params);
  const Totals<T> totals = totals_of(runs, params);
  return (totals.area - beta * totals.delay) / totals.mass;
}

void check_y(double y) {
  if (!(y > 0.0 && y <= 1.0)) {
    throw DomainError("y must lie in (0, 1]");
  }
}

}  // namespace

SteadyState steady_state(const ThresholdPolicy& policy, const SystemParams& params) {
  const auto runs = integer_runs(policy, params);
  const double mass = totals_of(runs, params).mass;

  SteadyState state;
  state.family = policy.canonical().family;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    GeometricSegment seg;
    seg.root = run.root;
    seg.rate = run.rate;
    seg.first_age = run.first_age;
    seg.age_step = run.step;
    seg.scale = run.scale / mass;
    seg.ratio = run.ratio;
    if (!run.infinite) {
      seg.length = static_cast<std::int64_t>(std::llround(run.length));
    }
    state.segments[i] = seg;
  }
  const auto& entry = state.segments[0].length.value_or(0) > 0 ? state.segments[0] : state.segments[1];
  state.x0 = entry.scale;
  return state;
}

double avg_cost(const ThresholdPolicy& policy, double beta, const SystemParams& params) {
  const auto totals = integer_totals(policy, params);
  return (totals.area - beta * totals.delay) / totals.mass;
}

double expected_stage_delay(const ThresholdPolicy& policy, const SystemParams& params) {
  const auto totals = integer_totals(policy, params);
  return totals.delay / totals.mass;
}

double avg_age(const ThresholdPolicy& policy, const SystemParams& params) {
  const auto totals = integer_totals(policy, params);
  return totals.area / totals.delay;
}

double j1_cost(double y, int k1, double beta, const SystemParams& params) {
  check_y(y);
  return j1_generic<double>(y, k1, beta, params);
}

double dJ1_dy(double y, int k1, double beta, const SystemParams& params) {
  check_y(y);
  return j1_generic<Dual>(Dual::variable(y), k1, beta, params).d;
}

double table1_J1(double y, int k1, double beta, const SystemParams& params) {
  check_y(y);
  const double d1 = params.d1;
  const double d2 = params.d2;
  const double p1 = params.p1;
  const double p2 = params.p2;
  const double q = std::pow(p2, k1);
  const double a1 = q * (d2 * (1 - p1) - d1 * (1 - p2)) * (d2 * (k1 + 1) - d1);
  // the B1 entry refers to A2, whose k2 is not defined in this context; k2 = 0
  const double a2 = (d1 * (1 - p2) - d2 * (1 - p1)) * (d1 - d2);
  const double b1 = -a2 + q * (1 - p2) * (0.5 * d1 * d1 - beta * d1 + d1 * d1 / (1 - p1)) +
                    (1 - p1) * (beta * d2 - 0.5 * d2 * d2 - d2 * d2 / (1 - p2));
  const double c1 = (1 - p1) * (0.5 * d2 * d2 - beta * d2 + 1 / (1 - p2)) * d2 * d2;
  const double dd1 = (d1 * (1 - p2) - d2 * (1 - p1)) * d2 * q;
  const double log_y = std::log(y) / std::log(p2);
  const double num = a1 * y * y + b1 * y + c1 + dd1 * y * log_y;
  const double den = 1 - p1 + (-1 + p1 + q * (1 - p2)) * y;
  return num / den;
}

Table1Deviation table1_deviation(double beta, const SystemParams& params, int m_max) {
  Table1Deviation dev;
  for (int k = 0; k <= max_type2_offset(params); ++k) {
    for (int m = 0; m <= m_max; ++m) {
      const double exact = avg_cost(ThresholdPolicy::type2(m, k), beta, params);
      const double table = table1_J1(std::pow(params.p2, m), k, beta, params);
      const double abs_dev = std::abs(table - exact);
      if (abs_dev > dev.max_abs) {
        dev.max_abs = abs_dev;
        dev.max_rel = abs_dev / std::max(std::abs(exact), std::numeric_limits<double>::min());
        dev.worst_m = m;
        dev.worst_k = k;
      }
    }
  }
  return dev;
}

}  // namespace aoirate
