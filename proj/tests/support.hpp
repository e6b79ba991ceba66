#pragma once

#include "aoirate/model.hpp"

#include <algorithm>
#include <random>

namespace testing_support {

/// Random Mixed-regime parameters, kept at least 10% away from the regime boundary
/// so that optimal thresholds stay small enough to enumerate.
inline aoirate::SystemParams random_mixed(std::mt19937_64& rng, double p2_cap = 0.9) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double d2 = 0.5 + 9.5 * u(rng);
    const double ratio = 1.05 + 1.95 * u(rng);
    const double p1 = 0.05 + 0.55 * u(rng);
    const double lo = std::max(p1, 1.0 - 0.9 * (1.0 - p1) / ratio);
    if (lo >= p2_cap) {
      continue;
    }
    const double p2 = lo + (p2_cap - lo) * u(rng);
    const aoirate::SystemParams p{ratio * d2, d2, p1, p2};
    if (p2 > p1 && aoirate::classify_regime(p) == aoirate::Regime::Mixed) {
      return p;
    }
  }
}

/// Random HighDominant parameters: d1(1 - p2) >= d2(1 - p1).
inline aoirate::SystemParams random_high_dominant(std::mt19937_64& rng, double p2_cap = 0.9) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double d2 = 0.5 + 9.5 * u(rng);
    const double ratio = 1.05 + 1.95 * u(rng);
    const double p1 = 0.05 + 0.6 * u(rng);
    const double hi = std::min(p2_cap, 1.0 - (1.0 - p1) / ratio);
    if (hi <= p1) {
      continue;
    }
    const double p2 = p1 + (hi - p1) * u(rng);
    const aoirate::SystemParams p{ratio * d2, d2, p1, p2};
    if (aoirate::classify_regime(p) == aoirate::Regime::HighDominant) {
      return p;
    }
  }
}

/// Any valid parameter set.
inline aoirate::SystemParams random_valid(std::mt19937_64& rng, double p2_cap = 0.9) {
  return std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? random_mixed(rng, p2_cap)
                                                            : random_high_dominant(rng, p2_cap);
}

}  // namespace testing_support

namespace testing_support {

/// True when the sequence never decreases again after its first increase, ignoring
/// steps below `tol` in magnitude.
template <class Seq>
bool at_most_one_turn(const Seq& values, double tol) {
  bool rising = false;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double step = values[i] - values[i - 1];
    if (step > tol) {
      rising = true;
    } else if (step < -tol && rising) {
      return false;
    }
  }
  return true;
}

}  // namespace testing_support

namespace testing_support {

/// Average age when every stage picks Low with probability q, independently.
inline double random_policy_age(double q, const aoirate::SystemParams& p) {
  const double mean_d = q * p.d1 + (1 - q) * p.d2;
  const double mean_d2 = q * p.d1 * p.d1 + (1 - q) * p.d2 * p.d2;
  const double success = q * (1 - p.p1) + (1 - q) * (1 - p.p2);
  return mean_d / success + mean_d2 / (2 * mean_d);
}

}  // namespace testing_support
