#include "aoirate/mdporacle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

namespace aoirate {

namespace {

constexpr std::array<Rate, 2> kRates{Rate::Low, Rate::High};

int code(Rate rate) { return rate == Rate::High ? 2 : 1; }

// Successor indices and per-action stage costs, laid out once per solve.
struct Kernel {
  std::vector<double> age;
  std::array<std::vector<std::size_t>, 2> fail;
  std::array<std::size_t, 2> reset{};

  explicit Kernel(const TruncatedStateSpace& space) : age(space.size()) {
    for (std::size_t u = 0; u < 2; ++u) {
      fail[u].resize(space.size());
      reset[u] = space.index(AgeState::reset(kRates[u]));
    }
    for (std::size_t i = 0; i < space.size(); ++i) {
      age[i] = space.age(i);
      for (std::size_t u = 0; u < 2; ++u) {
        fail[u][i] = space.successor(i, kRates[u], false);
      }
    }
  }
};

double sup_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out = std::max(out, std::abs(a[i] - b[i]));
  }
  return out;
}

}  // namespace

TruncatedStateSpace::TruncatedStateSpace(const SystemParams& params, int depth)
    : params_(params), depth_(depth) {
  if (depth < 1) {
    throw std::invalid_argument("truncation depth must be positive");
  }
  const auto d = static_cast<std::size_t>(depth);
  per_root_ = (d + 1) * (d + 2) / 2;
}

int TruncatedStateSpace::default_depth(const SystemParams& params) {
  const double raw = std::log(1e-12) / std::log(params.p2);
  int depth = static_cast<int>(std::floor(raw)) + 1;
  while (depth > 1 && std::pow(params.p2, depth - 1) < 1e-12) {
    --depth;
  }
  return std::clamp(depth, 1, 400);
}

TruncatedStateSpace TruncatedStateSpace::for_params(const SystemParams& params) {
  return TruncatedStateSpace(params, default_depth(params));
}

std::size_t TruncatedStateSpace::index(const AgeState& state) const {
  const std::size_t s = state.low_count + state.high_count;
  if (s > static_cast<std::size_t>(depth_)) {
    throw std::out_of_range("age state outside the truncated grid");
  }
  const std::size_t base = state.root == Rate::Low ? 0 : per_root_;
  return base + s * (s + 1) / 2 + state.high_count;
}

AgeState TruncatedStateSpace::state(std::size_t index) const {
  const Rate root = index < per_root_ ? Rate::Low : Rate::High;
  const std::size_t r = index % per_root_;
  auto s = static_cast<std::size_t>((std::sqrt(8.0 * static_cast<double>(r) + 1.0) - 1.0) / 2.0);
  while (s * (s + 1) / 2 > r) {
    --s;
  }
  while ((s + 1) * (s + 2) / 2 <= r) {
    ++s;
  }
  const std::size_t v = r - s * (s + 1) / 2;
  return AgeState{root, s - v, v};
}

std::size_t TruncatedStateSpace::successor(std::size_t index, Rate rate, bool success) const {
  if (success) {
    return this->index(AgeState::reset(rate));
  }
  const AgeState current = state(index);
  if (current.low_count + current.high_count >= static_cast<std::uint64_t>(depth_)) {
    return index;
  }
  return this->index(current.next(rate, false));
}

int TruncatedStateSpace::boundary_layer() const {
  return 2 * static_cast<int>(std::ceil(params_.d1 / params_.d2));
}

bool TruncatedStateSpace::interior(std::size_t index) const {
  const AgeState s = state(index);
  return static_cast<int>(s.low_count + s.high_count) <= depth_ - boundary_layer();
}

DiscountedSolution value_iteration(const SystemParams& params, double beta, double alpha,
                                   const TruncatedStateSpace& space, double tol) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("tol must be positive");
  }
  const Kernel kernel(space);
  const std::size_t n = space.size();
  const double gap = params.p2 - params.p1;
  const double slope = gap > 0.0 ? (params.d1 - params.d2) / (alpha * gap) : 0.0;

  DiscountedSolution out;
  out.values.alpha = alpha;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = slope * kernel.age[i];
  }
  std::vector<double> next(n);
  out.greedy.assign(n, Rate::High);

  std::array<std::vector<double>, 2> cost;
  std::array<double, 2> fail_weight{};
  for (std::size_t u = 0; u < 2; ++u) {
    cost[u].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      cost[u][i] = stage_cost(kernel.age[i], kRates[u], beta, params);
    }
    fail_weight[u] = alpha * params.error_prob(kRates[u]);
  }

  auto sweep = [&](const std::vector<double>& cur, std::vector<double>& dst) {
    const double reset_low = alpha * (1.0 - params.p1) * cur[kernel.reset[0]];
    const double reset_high = alpha * (1.0 - params.p2) * cur[kernel.reset[1]];
    for (std::size_t i = 0; i < n; ++i) {
      const double q_high = cost[1][i] + fail_weight[1] * cur[kernel.fail[1][i]] + reset_high;
      const double q_low = cost[0][i] + fail_weight[0] * cur[kernel.fail[0][i]] + reset_low;
      // ties go to High
      const bool low = q_low < q_high;
      dst[i] = low ? q_low : q_high;
      out.greedy[i] = low ? Rate::Low : Rate::High;
    }
  };

  sweep(v, next);
  const double first_change = std::max(sup_norm_diff(v, next), tol);
  const int cap = 100 + static_cast<int>(1.5 * std::ceil(std::log(tol / first_change) / std::log(alpha)));
  int iterations = 1;
  double residual = first_change;
  std::swap(v, next);
  while (residual > tol) {
    if (iterations >= cap) {
      throw OracleError("value iteration exceeded its contraction bound");
    }
    sweep(v, next);
    residual = sup_norm_diff(v, next);
    std::swap(v, next);
    ++iterations;
  }
  // greedy with respect to the converged values
  sweep(v, next);

  out.values.values = std::move(v);
  out.values.iterations = iterations;
  out.values.residual = residual;
  return out;
}

AverageSolution relative_value_iteration(const SystemParams& params, double beta,
                                         const TruncatedStateSpace& space, double tol,
                                         const std::optional<ThresholdPolicy>& fixed) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("tol must be positive");
  }
  const Kernel kernel(space);
  const std::size_t n = space.size();
  const std::size_t ref = kernel.reset[1];

  std::vector<std::size_t> fixed_action;
  if (fixed) {
    fixed_action.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      fixed_action[i] = threshold_action(*fixed, space.state(i)) == Rate::Low ? 0 : 1;
    }
  }

  AverageSolution out;
  std::vector<double> h(n, 0.0);
  std::vector<double> th(n);
  out.greedy.assign(n, Rate::High);
  constexpr int kCap = 200000;
  constexpr int kStallLimit = 2000;
  double best_span = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (int it = 1;; ++it) {
    const std::array<double, 2> reset_value{h[kernel.reset[0]], h[kernel.reset[1]]};
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      Rate best_rate = Rate::High;
      for (std::size_t u : {std::size_t{1}, std::size_t{0}}) {
        if (fixed && fixed_action[i] != u) {
          continue;
        }
        const Rate rate = kRates[u];
        const double p = params.error_prob(rate);
        const double q = stage_cost(kernel.age[i], rate, beta, params) + p * h[kernel.fail[u][i]] +
                         (1.0 - p) * reset_value[u];
        if (q < best) {
          best = q;
          best_rate = rate;
        }
      }
      th[i] = best;
      out.greedy[i] = best_rate;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = th[i] - h[i];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    const double offset = th[ref];
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = th[i] - offset;
    }
    if (hi - lo <= tol) {
      out.gain = 0.5 * (lo + hi);
      out.iterations = it;
      break;
    }
    if (hi - lo < best_span) {
      best_span = hi - lo;
      stalled = 0;
    } else if (++stalled >= kStallLimit) {
      throw OracleError("relative value iteration stalled at span " + std::to_string(best_span));
    }
    if (it >= kCap) {
      throw OracleError("relative value iteration did not settle");
    }
  }
  out.bias = std::move(h);
  return out;
}

Regime discounted_regime(const SystemParams& params, double alpha) {
  return (1.0 - alpha * params.p2) * params.d1 < (1.0 - alpha * params.p1) * params.d2 ? Regime::Mixed
                                                                                       : Regime::HighDominant;
}

ThresholdCheck check_threshold_structure(const std::vector<Rate>& greedy, const TruncatedStateSpace& space,
                                         Regime expected) {
  if (greedy.size() != space.size()) {
    throw std::invalid_argument("greedy policy does not cover the state space");
  }
  const int limit = space.depth() - space.boundary_layer();
  // Mixed: action code (high = 2, low = 1) never rises with age.
  const int sign = expected == Regime::Mixed ? 1 : -1;
  auto at = [&](Rate root, int l, int v) {
    return code(greedy[space.index(AgeState{root, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(v)})]);
  };

  ThresholdCheck out;
  out.is_threshold = true;
  for (Rate root : kRates) {
    for (int s = 0; s < limit; ++s) {
      for (int v = 0; v <= s; ++v) {
        const int l = s - v;
        const int here = at(root, l, v);
        if (sign * (at(root, l + 1, v) - here) > 0 || sign * (at(root, l, v + 1) - here) > 0) {
          out.is_threshold = false;
        }
      }
    }
    const Rate above = expected == Regime::Mixed ? Rate::Low : Rate::High;
    int switch_at = space.depth();
    for (int c = 0; c <= std::max(limit, 0); ++c) {
      const int a = expected == Regime::Mixed ? at(root, 0, c) : at(root, c, 0);
      if (a == code(above)) {
        switch_at = c;
        break;
      }
    }
    (root == Rate::Low ? out.switch_low_root : out.switch_high_root) = switch_at;
  }
  return out;
}

ThresholdPolicy policy_from_greedy(const ThresholdCheck& check, Regime expected) {
  const int m = check.switch_low_root;
  const int k = std::max(check.switch_high_root - m, 0);
  return expected == Regime::Mixed ? ThresholdPolicy::type2(m, k) : ThresholdPolicy::type1(m, k);
}

DenseChainResult dense_chain_solve(const ThresholdPolicy& policy, double beta, const SystemParams& params,
                                   std::optional<int> depth) {
  const int limit = depth.value_or(policy.n() + TruncatedStateSpace::default_depth(params));
  auto key = [](const AgeState& s) {
    return (s.low_count << 32U) ^ (s.high_count << 1U) ^ (s.root == Rate::High ? 1U : 0U);
  };

  std::vector<AgeState> states;
  std::unordered_map<std::uint64_t, std::size_t> lookup;
  std::deque<std::size_t> queue;
  auto visit = [&](const AgeState& s) {
    const auto [it, fresh] = lookup.emplace(key(s), states.size());
    if (fresh) {
      states.push_back(s);
      queue.push_back(it->second);
    }
    return it->second;
  };
  visit(AgeState::reset(Rate::Low));
  visit(AgeState::reset(Rate::High));

  struct Edge {
    std::size_t from, to;
    double prob;
  };
  std::vector<Edge> edges;
  std::vector<Rate> action;
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const AgeState s = states[i];
    const Rate u = threshold_action(policy, s);
    const double p = params.error_prob(u);
    const bool at_edge = static_cast<int>(s.low_count + s.high_count) >= limit;
    const std::size_t fail = at_edge ? i : visit(s.next(u, false));
    const std::size_t succ = visit(AgeState::reset(u));
    edges.push_back({i, fail, p});
    edges.push_back({i, succ, 1.0 - p});
  }
  for (const auto& s : states) {
    action.push_back(threshold_action(policy, s));
  }

  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd a = -Eigen::MatrixXd::Identity(n, n);
  for (const auto& e : edges) {
    a(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(e.from)) += e.prob;
  }
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd pi = a.partialPivLu().solve(rhs);

  DenseChainResult out;
  out.states = states.size();
  double area = 0.0;
  double delay = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = states[static_cast<std::size_t>(i)];
    const Rate u = action[static_cast<std::size_t>(i)];
    const double d = params.delay(u);
    const double age = s.value(params);
    area += pi(i) * (age * d + 0.5 * d * d);
    delay += pi(i) * d;
    if (static_cast<int>(s.low_count + s.high_count) >= limit) {
      out.boundary_mass += pi(i);
    }
  }
  out.avg_cost = area - beta * delay;
  out.expected_delay = delay;
  out.avg_age = area / delay;
  return out;
}

BruteForceResult brute_force_type2(double beta, const SystemParams& params, int m_max) {
  BruteForceResult best{avg_cost(ThresholdPolicy::type2(0, 0), beta, params), ThresholdPolicy::type2(0, 0)};
  for (int k = 0; k <= max_type2_offset(params); ++k) {
    int best_m = 0;
    double best_k = avg_cost(ThresholdPolicy::type2(0, k), beta, params);
    for (int m = 1; m <= m_max; ++m) {
      const double c = avg_cost(ThresholdPolicy::type2(m, k), beta, params);
      if (c < best_k) {
        best_k = c;
        best_m = m;
      }
    }
    if (best_k <= best.value) {
      best = {best_k, ThresholdPolicy::type2(best_m, k)};
    }
  }
  return best;
}

}  // namespace aoirate
