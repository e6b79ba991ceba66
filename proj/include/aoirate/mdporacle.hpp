#pragma once

#include "aoirate/exacteval.hpp"
#include "aoirate/model.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace aoirate {

/// Symbolic age grid {(root, l, v) : l + v <= depth}; failures at the outer
/// layer stay put.
class TruncatedStateSpace {
public:
  TruncatedStateSpace(const SystemParams& params, int depth);

  /// Smallest depth with p2^depth < 1e-12, capped at 400.
  static int default_depth(const SystemParams& params);
  static TruncatedStateSpace for_params(const SystemParams& params);

  [[nodiscard]] const SystemParams& params() const { return params_; }
  [[nodiscard]] int depth() const { return depth_; }
  [[nodiscard]] std::size_t size() const { return 2 * per_root_; }

  [[nodiscard]] std::size_t index(const AgeState& state) const;
  [[nodiscard]] AgeState state(std::size_t index) const;
  [[nodiscard]] double age(std::size_t index) const { return state(index).value(params_); }

  /// Index reached after transmitting with `rate` from `index`.
  [[nodiscard]] std::size_t successor(std::size_t index, Rate rate, bool success) const;

  /// States whose failure count is at least this far from the outer layer.
  [[nodiscard]] int boundary_layer() const;
  [[nodiscard]] bool interior(std::size_t index) const;

private:
  SystemParams params_;
  int depth_;
  std::size_t per_root_;
};

class OracleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ValueFunction {
  std::vector<double> values;
  double alpha = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct DiscountedSolution {
  ValueFunction values;
  std::vector<Rate> greedy;
};

/// Jacobi value iteration for the alpha-discounted problem, started from
/// V0(a) = (d1 - d2) / (alpha (p2 - p1)) * a. Ties in the greedy action go to High.
DiscountedSolution value_iteration(const SystemParams& params, double beta, double alpha,
                                   const TruncatedStateSpace& space, double tol);

struct AverageSolution {
  double gain = 0.0;
  std::vector<Rate> greedy;
  std::vector<double> bias;
  int iterations = 0;
};

/// Relative value iteration with the high-rate reset state as reference.
/// With `fixed`, evaluates that threshold policy instead of optimizing.
AverageSolution relative_value_iteration(const SystemParams& params, double beta,
                                         const TruncatedStateSpace& space, double tol,
                                         const std::optional<ThresholdPolicy>& fixed = std::nullopt);

/// Direction the discounted greedy policy must follow: Mixed (high then low)
/// when (1 - alpha p2) d1 < (1 - alpha p1) d2, HighDominant (low then high) otherwise.
Regime discounted_regime(const SystemParams& params, double alpha);

struct ThresholdCheck {
  bool is_threshold = false;
  /// First interior count at which the action switches, per chain root;
  /// depth() when it never switches.
  int switch_low_root = 0;
  int switch_high_root = 0;
};

/// Verifies monotone actions along both failure directions of each chain,
/// interior states only. Mixed expects high then low, HighDominant low then high.
ThresholdCheck check_threshold_structure(const std::vector<Rate>& greedy, const TruncatedStateSpace& space,
                                         Regime expected);

/// Reads (m, n) off a greedy policy that passed check_threshold_structure.
ThresholdPolicy policy_from_greedy(const ThresholdCheck& check, Regime expected);

/// Stationary quantities of a threshold policy from a dense linear solve of the
/// balance equations on the states it reaches from either reset state.
struct DenseChainResult {
  double avg_cost = 0.0;
  double avg_age = 0.0;
  double expected_delay = 0.0;
  double boundary_mass = 0.0;
  std::size_t states = 0;
};

DenseChainResult dense_chain_solve(const ThresholdPolicy& policy, double beta, const SystemParams& params,
                                   std::optional<int> depth = std::nullopt);

/// Exhaustive minimum of the Type2 cost over m in [0, m_max] and every admissible k1,
/// using the same tie rule as p_of_beta.
struct BruteForceResult {
  double value;
  ThresholdPolicy argmin;
};

BruteForceResult brute_force_type2(double beta, const SystemParams& params, int m_max);

}  // namespace aoirate
