#pragma once

#include "aoirate/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace aoirate {

class PolicyError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Type2: high rate below the threshold, low rate above (optimal in the Mixed regime).
/// Type1: low rate below the threshold, high rate above.
enum class PolicyFamily : std::uint8_t { Type2, Type1, AlwaysLow, AlwaysHigh };

std::string_view to_string(PolicyFamily family);

/// Integer-threshold policy.
///
/// `m` counts below-threshold transmissions allowed after a low-rate delivery,
/// `n = m + k` after a high-rate delivery. Once the above-threshold rate has
/// been used the policy keeps it until the next delivery.
struct ThresholdPolicy {
  PolicyFamily family = PolicyFamily::AlwaysHigh;
  int m = 0;
  int k = 0;

  static ThresholdPolicy type2(int m, int k) { return {PolicyFamily::Type2, m, k}; }
  static ThresholdPolicy type1(int m, int k) { return {PolicyFamily::Type1, m, k}; }
  static ThresholdPolicy always_low() { return {PolicyFamily::AlwaysLow, 0, 0}; }
  static ThresholdPolicy always_high() { return {PolicyFamily::AlwaysHigh, 0, 0}; }

  [[nodiscard]] int n() const { return m + k; }

  /// AlwaysLow -> Type2(0,0), AlwaysHigh -> Type1(0,0); others unchanged.
  [[nodiscard]] ThresholdPolicy canonical() const;

  /// Rate used while the failure count is below the threshold.
  [[nodiscard]] Rate below_rate() const;
  [[nodiscard]] Rate above_rate() const;

  /// Threshold that applies to a renewal cycle started by a delivery at `root`.
  [[nodiscard]] int threshold(Rate root) const { return root == Rate::Low ? m : n(); }

  /// Checks m, k >= 0 and the family's admissible k range (Type2: k <= floor(d1/d2),
  /// Type1: k <= 1). Throws PolicyError.
  void validate(const SystemParams& params) const;

  friend bool operator==(const ThresholdPolicy&, const ThresholdPolicy&) = default;
};

std::string to_string(const ThresholdPolicy& policy);

/// Action of a threshold policy in a symbolic age state.
Rate threshold_action(const ThresholdPolicy& policy, const AgeState& state);

/// Largest admissible k for Type2 policies.
int max_type2_offset(const SystemParams& params);

/// States b, b + s, b + 2s, ... all taking `rate`, with masses scale * ratio^l.
/// `length` is empty for the infinite tail.
struct GeometricSegment {
  Rate root = Rate::High;
  Rate rate = Rate::High;
  double first_age = 0.0;
  double age_step = 0.0;
  double scale = 0.0;
  double ratio = 0.0;
  std::optional<std::int64_t> length;

  [[nodiscard]] double mass_at(std::int64_t l) const;
  [[nodiscard]] double age_at(std::int64_t l) const { return first_age + static_cast<double>(l) * age_step; }
  [[nodiscard]] double total_mass() const;
};

/// Stationary distribution of the chain induced by a threshold policy.
///
/// segments = {x, x', z, z'}: x/x' are the below/above-threshold parts of the
/// chain rooted at the below-threshold rate's delay, z/z' the same for the other
/// root. x0 is the mass of that first chain's entry state (age d2 for Type2, d1
/// for Type1). Segments never share states, so total_mass() sums all four.
struct SteadyState {
  PolicyFamily family = PolicyFamily::Type2;
  double x0 = 0.0;
  std::array<GeometricSegment, 4> segments{};

  [[nodiscard]] double total_mass() const;
};

SteadyState steady_state(const ThresholdPolicy& policy, const SystemParams& params);

/// Long-run average of stage_cost under the policy, exact (closed-form series).
double avg_cost(const ThresholdPolicy& policy, double beta, const SystemParams& params);

/// Stationary mean of the per-stage transmission delay.
double expected_stage_delay(const ThresholdPolicy& policy, const SystemParams& params);

/// Total average age: avg_cost(beta = 0) / expected_stage_delay.
double avg_age(const ThresholdPolicy& policy, const SystemParams& params);

/// Type2 average cost as a function of y = p2^m over real m >= 0 (0 < y <= 1).
/// Agrees with avg_cost(type2(m, k1)) at y = p2^m. Throws DomainError outside (0, 1].
double j1_cost(double y, int k1, double beta, const SystemParams& params);

/// Exact derivative of j1_cost with respect to y.
double dJ1_dy(double y, int k1, double beta, const SystemParams& params);

/// Literal transcription of the published closed form and its coefficient table.
/// Kept only as a cross-check; see table1_deviation.
double table1_J1(double y, int k1, double beta, const SystemParams& params);

struct Table1Deviation {
  double max_abs = 0.0;
  double max_rel = 0.0;
  int worst_m = 0;
  int worst_k = 0;
};

/// Max |table1_J1 - avg_cost| over m in [0, m_max], k1 in [0, floor(d1/d2)].
Table1Deviation table1_deviation(double beta, const SystemParams& params, int m_max);

}  // namespace aoirate
