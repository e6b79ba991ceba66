#include "aoirate/mdporacle.hpp"
#include "aoirate/optimizer.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace aoirate;

namespace {

const SystemParams kBase{10, 8, 0.4, 0.75};

}  // namespace

TEST_CASE("truncated state space") {
  CHECK(TruncatedStateSpace::default_depth(kBase) == 97);
  CHECK(std::pow(0.75, 97) < 1e-12);
  CHECK(std::pow(0.75, 96) >= 1e-12);
  CHECK(TruncatedStateSpace::default_depth({10, 8, 0.4, 0.999}) == 400);

  const TruncatedStateSpace space(kBase, 10);
  CHECK(space.size() == 2 * 11 * 12 / 2);
  for (std::size_t i = 0; i < space.size(); ++i) {
    CHECK(space.index(space.state(i)) == i);
  }
  const std::size_t low_reset = space.index(AgeState::reset(Rate::Low));
  const std::size_t high_reset = space.index(AgeState::reset(Rate::High));
  for (std::size_t i = 0; i < space.size(); ++i) {
    CHECK(space.successor(i, Rate::Low, true) == low_reset);
    CHECK(space.successor(i, Rate::High, true) == high_reset);
  }
  CHECK(space.age(low_reset) == 10.0);
  CHECK(space.age(high_reset) == 8.0);

  const std::size_t inner = space.index({Rate::High, 2, 3});
  CHECK(space.state(space.successor(inner, Rate::Low, false)) == AgeState{Rate::High, 3, 3});
  CHECK(space.age(space.successor(inner, Rate::High, false)) == space.age(inner) + 8.0);

  const std::size_t outer = space.index({Rate::Low, 4, 6});
  CHECK(space.successor(outer, Rate::Low, false) == outer);
  CHECK(space.successor(outer, Rate::High, false) == outer);

  CHECK(space.boundary_layer() == 4);
  CHECK(space.interior(space.index({Rate::Low, 3, 3})));
  CHECK_FALSE(space.interior(space.index({Rate::Low, 3, 4})));
}

TEST_CASE("value iteration on the base mixed parameters") {
  const TruncatedStateSpace space = TruncatedStateSpace::for_params(kBase);
  const auto vi = value_iteration(kBase, 16.0, 0.999, space, 1e-6);
  CHECK(discounted_regime(kBase, 0.999) == Regime::Mixed);
  const ThresholdCheck check = check_threshold_structure(vi.greedy, space, Regime::Mixed);
  CHECK(check.is_threshold);
  CHECK(vi.values.residual <= 1e-6);

  SUBCASE("values are non-decreasing in age along both directions") {
    const auto& v = vi.values.values;
    const int limit = space.depth() - space.boundary_layer();
    for (Rate root : {Rate::Low, Rate::High}) {
      for (int s = 0; s < limit; ++s) {
        for (int c = 0; c <= s; ++c) {
          const AgeState here{root, static_cast<std::uint64_t>(s - c), static_cast<std::uint64_t>(c)};
          const double value = v[space.index(here)];
          CHECK(value <= v[space.index(here.next(Rate::Low, false))] + 1e-9);
          CHECK(value <= v[space.index(here.next(Rate::High, false))] + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("value iteration on high-dominant parameters picks high everywhere") {
  const SystemParams half{10, 8, 0.5, 0.5};
  const TruncatedStateSpace space = TruncatedStateSpace::for_params(half);
  const auto vi = value_iteration(half, 20.0, 0.999, space, 1e-6);
  for (Rate r : vi.greedy) {
    CHECK(r == Rate::High);
  }
}

TEST_CASE("identical actions give a symmetric value function") {
  const SystemParams twin{8, 8, 0.5, 0.5};
  const TruncatedStateSpace space(twin, 30);
  const auto vi = value_iteration(twin, 12.0, 0.9, space, 1e-10);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const AgeState s = space.state(i);
    const AgeState mirror{s.root == Rate::Low ? Rate::High : Rate::Low, s.high_count, s.low_count};
    CHECK(vi.values.values[i] == doctest::Approx(vi.values.values[space.index(mirror)]).epsilon(1e-12));
    CHECK(vi.greedy[i] == Rate::High);
  }
}

TEST_CASE("discounted greedy policies follow the predicted direction") {
  std::mt19937_64 rng(211);
  int cases = 0;
  for (int i = 0; i < 6; ++i) {
    const SystemParams p = testing_support::random_valid(rng, 0.8);
    const auto b = beta_bounds(p);
    const double beta = b.beta_min + std::uniform_real_distribution<double>(0, 1)(rng) * (b.beta_max - b.beta_min);
    const TruncatedStateSpace space = TruncatedStateSpace::for_params(p);
    for (double alpha : {0.9, 0.99}) {
      const auto vi = value_iteration(p, beta, alpha, space, 1e-7);
      CAPTURE(p.d1);
      CAPTURE(p.d2);
      CAPTURE(p.p1);
      CAPTURE(p.p2);
      CAPTURE(alpha);
      CHECK(check_threshold_structure(vi.greedy, space, discounted_regime(p, alpha)).is_threshold);
      ++cases;
    }
  }
  CHECK(cases == 12);
}

TEST_CASE("discounted thresholds approach the optimizer as alpha grows") {
  const SystemParams p{2.1, 1, 0.4, 0.75};
  const SolveResult s = solve(p);
  const TruncatedStateSpace space = TruncatedStateSpace::for_params(p);
  const auto vi = value_iteration(p, s.beta_star, 0.9999, space, 1e-6);
  const ThresholdCheck check = check_threshold_structure(vi.greedy, space, Regime::Mixed);
  CHECK(check.is_threshold);
  CHECK(policy_from_greedy(check, Regime::Mixed) == s.policy);
}

TEST_CASE("check_threshold_structure") {
  const TruncatedStateSpace space(kBase, 20);
  SUBCASE("constant policies") {
    const std::vector<Rate> high(space.size(), Rate::High);
    const ThresholdCheck mixed = check_threshold_structure(high, space, Regime::Mixed);
    CHECK(mixed.is_threshold);
    CHECK(mixed.switch_low_root == space.depth());
    const ThresholdCheck hd = check_threshold_structure(high, space, Regime::HighDominant);
    CHECK(hd.is_threshold);
    CHECK(hd.switch_low_root == 0);
    CHECK(policy_from_greedy(hd, Regime::HighDominant).canonical() == ThresholdPolicy::always_high().canonical());
  }
  SUBCASE("alternating actions are rejected") {
    std::vector<Rate> alt(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
      const AgeState s = space.state(i);
      alt[i] = (s.low_count + s.high_count) % 2 == 0 ? Rate::High : Rate::Low;
    }
    CHECK_FALSE(check_threshold_structure(alt, space, Regime::Mixed).is_threshold);
    CHECK_FALSE(check_threshold_structure(alt, space, Regime::HighDominant).is_threshold);
  }
  SUBCASE("a threshold policy round-trips") {
    const auto pol = ThresholdPolicy::type2(3, 1);
    std::vector<Rate> greedy(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
      greedy[i] = threshold_action(pol, space.state(i));
    }
    const ThresholdCheck check = check_threshold_structure(greedy, space, Regime::Mixed);
    CHECK(check.is_threshold);
    CHECK(check.switch_low_root == 3);
    CHECK(check.switch_high_root == 4);
    CHECK(policy_from_greedy(check, Regime::Mixed) == pol);
  }
}

TEST_CASE("relative value iteration") {
  SUBCASE("forced always-high at its own average age has zero gain") {
    const SystemParams half{10, 8, 0.5, 0.5};
    const TruncatedStateSpace space = TruncatedStateSpace::for_params(half);
    const auto r = relative_value_iteration(half, 20.0, space, 1e-10, ThresholdPolicy::always_high());
    CHECK(std::abs(r.gain) <= 1e-6);
  }
  SUBCASE("switch points at the optimum reproduce the threshold table") {
    const SystemParams p{2.1, 1, 0.4, 0.75};
    const SolveResult s = solve(p);
    const TruncatedStateSpace space = TruncatedStateSpace::for_params(p);
    const auto r = relative_value_iteration(p, s.beta_star, space, 1e-10);
    const ThresholdCheck check = check_threshold_structure(r.greedy, space, Regime::Mixed);
    CHECK(check.is_threshold);
    CHECK(check.switch_low_root == 3);
    CHECK(check.switch_high_root == 4);
  }
  SUBCASE("gain tracks p(beta) and decreases in beta") {
    const TruncatedStateSpace space = TruncatedStateSpace::for_params(kBase);
    const auto b = beta_bounds(kBase);
    double prev = INFINITY;
    for (int j = 0; j <= 8; ++j) {
      const double beta = b.beta_min + j * (b.beta_max - b.beta_min) / 8;
      const auto r = relative_value_iteration(kBase, beta, space, 1e-10);
      CHECK(r.gain < prev);
      CHECK(std::abs(r.gain - p_of_beta(beta, kBase).value) <= 1e-6);
      prev = r.gain;
    }
  }
  SUBCASE("gain matches the closed form of the greedy policy") {
    std::mt19937_64 rng(223);
    for (int i = 0; i < 10; ++i) {
      const SystemParams p = testing_support::random_valid(rng, 0.8);
      const auto b = beta_bounds(p);
      const double beta = 0.5 * (b.beta_min + b.beta_max);
      const TruncatedStateSpace space = TruncatedStateSpace::for_params(p);
      const auto r = relative_value_iteration(p, beta, space, 1e-10);
      const Regime regime = classify_regime(p);
      const ThresholdCheck check = check_threshold_structure(r.greedy, space, regime);
      REQUIRE(check.is_threshold);
      const double exact = avg_cost(policy_from_greedy(check, regime), beta, p);
      CHECK(std::abs(r.gain - exact) <= 1e-6);
    }
  }
  SUBCASE("gain at beta star vanishes and is insensitive to truncation") {
    SolveConfig tight;
    tight.eps1 = 1e-9 * kBase.d2;
    const SolveResult s = solve(kBase, tight);
    const TruncatedStateSpace full = TruncatedStateSpace::for_params(kBase);
    const TruncatedStateSpace twice(kBase, 2 * full.depth());
    const double g_full = relative_value_iteration(kBase, s.beta_star, full, 1e-11).gain;
    const double g_twice = relative_value_iteration(kBase, s.beta_star, twice, 1e-11).gain;
    CHECK(std::abs(g_full) <= 1e-6);
    CHECK(std::abs(g_full - g_twice) < 1e-9);
  }
}

TEST_CASE("dense chain solve") {
  const DenseChainResult r = dense_chain_solve(ThresholdPolicy::type2(1, 1), 15.0, kBase);
  CHECK(r.states > 0);
  CHECK(r.boundary_mass < 1e-12);
  CHECK(r.avg_cost == doctest::Approx(avg_cost(ThresholdPolicy::type2(1, 1), 15.0, kBase)).epsilon(1e-10));
  CHECK(r.expected_delay == doctest::Approx(expected_stage_delay(ThresholdPolicy::type2(1, 1), kBase)));
}

TEST_CASE("brute force enumeration") {
  const BruteForceResult r = brute_force_type2(16.0, kBase, 200);
  for (int k = 0; k <= 1; ++k) {
    for (int m = 0; m <= 200; ++m) {
      CHECK(r.value <= avg_cost(ThresholdPolicy::type2(m, k), 16.0, kBase));
    }
  }
  CHECK(r.value == avg_cost(r.argmin, 16.0, kBase));
}
