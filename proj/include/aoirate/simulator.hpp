#pragma once

#include "aoirate/exacteval.hpp"
#include "aoirate/model.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace aoirate {

struct ThresholdSpec {
  ThresholdPolicy policy;
};
struct AlwaysLowSpec {};
struct AlwaysHighSpec {};
struct RandomSpec {
  /// Probability of choosing the low rate at each stage.
  double p_low = 0.5;
};
struct DelayOptimalSpec {
  /// Rate with the smaller mean delay, fixed when the spec is built.
  Rate rate = Rate::High;
};

/// Policy the simulator can run.
class PolicySpec {
public:
  using Variant = std::variant<ThresholdSpec, AlwaysLowSpec, AlwaysHighSpec, RandomSpec, DelayOptimalSpec>;

  static PolicySpec threshold(const ThresholdPolicy& policy) { return PolicySpec(ThresholdSpec{policy}); }
  static PolicySpec always_low() { return PolicySpec(AlwaysLowSpec{}); }
  static PolicySpec always_high() { return PolicySpec(AlwaysHighSpec{}); }
  /// Throws std::invalid_argument unless p_low lies in [0, 1].
  static PolicySpec random(double p_low);
  /// Resolves to the smaller mean delay; equal mean delays pick High.
  static PolicySpec delay_optimal(const SystemParams& params);

  [[nodiscard]] const Variant& variant() const { return variant_; }
  [[nodiscard]] std::string name() const;

  /// The equivalent threshold policy, when one exists (everything but RandomSpec).
  [[nodiscard]] std::optional<ThresholdPolicy> as_threshold() const;

private:
  explicit PolicySpec(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

/// 64-bit Mersenne Twister seeded through SplitMix64 from (seed, stream).
class StreamRng {
public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform();

private:
  std::mt19937_64 engine_;
};

Rate decide(const PolicySpec& policy, const AgeState& state, StreamRng& rng);

struct SimEstimate {
  double avg_age = 0.0;
  double std_err = 0.0;
  std::uint64_t stages = 0;
  double area = 0.0;
  double total_time = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t warmup_stages = 0;
};

inline constexpr int kBatchCount = 50;

/// Runs `stages` stages from age d2 (root High) and estimates the average age
/// from the stages after `warmup`, with a batch-means standard error.
/// Params are not validated, so callers may probe limiting cases.
SimEstimate simulate(const PolicySpec& policy, const SystemParams& params, std::uint64_t stages,
                     std::uint64_t warmup, std::uint64_t seed, std::uint64_t stream = 0);

/// simulate() for each policy, policy i on RNG stream i.
std::vector<SimEstimate> compare(const std::vector<PolicySpec>& policies, const SystemParams& params,
                                 std::uint64_t stages, std::uint64_t warmup, std::uint64_t seed);

}  // namespace aoirate
