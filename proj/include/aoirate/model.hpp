#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aoirate {

/// Raised when link parameters violate d1 > d2 > 0 or 0 < p1 <= p2 < 1.
class ParamError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Transmission rate. Low is slow and reliable, High is fast and lossy.
enum class Rate : std::uint8_t { Low = 1, High = 2 };

/// Which threshold family is optimal for a parameter set.
enum class Regime : std::uint8_t { Mixed, HighDominant };

std::string_view to_string(Rate rate);
std::string_view to_string(Regime regime);

/// Two-rate link: delays d1 > d2 > 0 (time units), error probabilities 0 < p1 <= p2 < 1.
///
/// A plain aggregate so that tests can build out-of-domain values on purpose;
/// call validate() (or make_params) wherever the invariants are required.
struct SystemParams {
  double d1 = 0.0;
  double d2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;

  [[nodiscard]] double delay(Rate rate) const { return rate == Rate::Low ? d1 : d2; }
  [[nodiscard]] double error_prob(Rate rate) const { return rate == Rate::Low ? p1 : p2; }

  /// Throws ParamError naming the first violated invariant.
  void validate() const;

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

SystemParams make_params(double d1, double d2, double p1, double p2);

/// Symbolic age: the rate that last delivered plus consecutive failure counts.
///
/// value() = d_root + lowCount*d1 + highCount*d2. Two distinct states can share
/// a numeric age when d1 is a multiple of d2, which is why policies act on the
/// counts rather than on the age itself.
struct AgeState {
  Rate root = Rate::High;
  std::uint64_t low_count = 0;
  std::uint64_t high_count = 0;

  [[nodiscard]] double value(const SystemParams& params) const {
    return params.delay(root) + static_cast<double>(low_count) * params.d1 +
           static_cast<double>(high_count) * params.d2;
  }

  [[nodiscard]] static AgeState reset(Rate delivered) { return AgeState{delivered, 0, 0}; }

  /// Successor after transmitting with `rate`.
  [[nodiscard]] AgeState next(Rate rate, bool success) const {
    if (success) {
      return reset(rate);
    }
    AgeState out = *this;
    if (rate == Rate::Low) {
      ++out.low_count;
    } else {
      ++out.high_count;
    }
    return out;
  }

  friend bool operator==(const AgeState&, const AgeState&) = default;
};

struct BetaBounds {
  double beta_min;
  double beta_max;
};

/// d / (1 - p): expected time to a delivery when repeating one rate.
double mean_delay(const SystemParams& params, Rate rate);

/// Mixed iff d1(1-p2) < d2(1-p1) by more than 1e-12*max(d1, d2); ties go to HighDominant.
Regime classify_regime(const SystemParams& params);

/// (age - beta) * d_u + d_u^2 / 2
double stage_cost(double age, Rate rate, double beta, const SystemParams& params);

/// [1.5 d2, min(mean_delay(Low) + d1/2, mean_delay(High) + d2/2)]; validates params.
BetaBounds beta_bounds(const SystemParams& params);

/// Average age of the policy that always uses `rate`: d/(1-p) + d/2.
double always_rate_age(const SystemParams& params, Rate rate);

void to_json(nlohmann::json& j, const SystemParams& params);
/// Parses {"d1", "d2", "p1", "p2"} and validates; throws ParamError.
void from_json(const nlohmann::json& j, SystemParams& params);

}  // namespace aoirate
