#pragma once

#include "aoirate/exacteval.hpp"
#include "aoirate/model.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace aoirate {

class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SolveConfig {
  /// Bisection width on beta. Empty means 1e-6 * d2.
  std::optional<double> eps1;
  /// Golden-section bracket width on y = p2^m.
  double eps2 = 1e-4;
  /// Largest threshold considered; p2^m underflows long before the default.
  int m_max = 10000;
  bool record_trace = false;

  [[nodiscard]] double resolved_eps1(const SystemParams& params) const {
    return eps1.value_or(1e-6 * params.d2);
  }

  /// Throws std::invalid_argument unless eps1 > 0, 0 < eps2 < 1, m_max >= 1.
  void validate() const;
};

struct PBeta {
  double value;
  ThresholdPolicy argmin;
};

struct TracePoint {
  double beta;
  double p;
};

struct SolveResult {
  double beta_star = 0.0;
  ThresholdPolicy policy;
  std::vector<TracePoint> p_beta_trace;
  int iterations = 0;
  Regime regime = Regime::Mixed;
  /// p(beta_star), i.e. the parametric cost of `policy` at beta_star.
  double p_at_star = 0.0;
};

struct YBracket {
  double y_lo;
  double y_hi;
  /// True when the derivative test at y = 1 settled the search without iterating.
  bool at_boundary = false;
};

/// Minimum over threshold policies of the long-run parametric cost at `beta`.
///
/// Mixed regime: running minimum over k1 = 0..floor(d1/d2) of the best Type2
/// threshold for each k1. A later k1 replaces the incumbent on an exact tie.
/// HighDominant: the always-high cost.
PBeta p_of_beta(double beta, const SystemParams& params, const SolveConfig& config = {});

/// Golden-section bracket on y = p2^m for the Type2 cost with offset k1.
/// Requires the Mixed regime and beta in [beta_min, beta_max].
YBracket golden_section_min(int k1, double beta, const SystemParams& params, double eps2);

/// Best integer m for a bracket: every integer between floor(log_p2 y_hi) and
/// ceil(log_p2 y_lo) clamped to [0, m_max]; y_lo = 0 opens the window to m_max.
/// Ties go to the smaller m.
int integerize(double y_lo, double y_hi, int k1, double beta, const SystemParams& params, int m_max);

/// Bisection on beta over [beta_min, beta_max] until the bracket is at most eps1 wide.
SolveResult solve(const SystemParams& params, const SolveConfig& config = {});

}  // namespace aoirate
