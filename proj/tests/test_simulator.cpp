#include "aoirate/optimizer.hpp"
#include "aoirate/simulator.hpp"
#include "support.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <random>

using namespace aoirate;

namespace {

const SystemParams kBase{10, 8, 0.4, 0.75};

bool within(const SimEstimate& e, double exact, double sigmas = 3.0) {
  return std::abs(e.avg_age - exact) <= sigmas * e.std_err;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("decide") {
  StreamRng rng(1, 0);
  const auto t2 = PolicySpec::threshold(ThresholdPolicy::type2(3, 1));
  CHECK(decide(t2, {Rate::Low, 0, 2}, rng) == Rate::High);
  CHECK(decide(t2, {Rate::Low, 0, 3}, rng) == Rate::Low);
  CHECK(decide(t2, {Rate::High, 0, 3}, rng) == Rate::High);
  CHECK(decide(t2, {Rate::High, 0, 4}, rng) == Rate::Low);

  const auto low = PolicySpec::threshold(ThresholdPolicy::type2(0, 0));
  for (const AgeState s : {AgeState{Rate::High, 0, 0}, AgeState{Rate::Low, 2, 0}, AgeState{Rate::High, 0, 5}}) {
    CHECK(decide(low, s, rng) == Rate::Low);
    CHECK(decide(PolicySpec::always_high(), s, rng) == Rate::High);
    CHECK(decide(PolicySpec::always_low(), s, rng) == Rate::Low);
    CHECK(decide(PolicySpec::random(0.0), s, rng) == Rate::High);
    CHECK(decide(PolicySpec::random(1.0), s, rng) == Rate::Low);
  }
}

TEST_CASE("policy specs") {
  CHECK_THROWS_AS(PolicySpec::random(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(PolicySpec::random(1.5), std::invalid_argument);
  CHECK(PolicySpec::random(0.25).name() == "random(0.25)");
  CHECK_FALSE(PolicySpec::random(0.25).as_threshold().has_value());
  CHECK(PolicySpec::threshold(ThresholdPolicy::type2(1, 1)).name() == "type2(m=1,n=2)");

  CHECK(std::get<DelayOptimalSpec>(PolicySpec::delay_optimal(kBase).variant()).rate == Rate::Low);
  CHECK(std::get<DelayOptimalSpec>(PolicySpec::delay_optimal({10, 8, 0.5, 0.5}).variant()).rate == Rate::High);
  // 10 / 0.8 == 5 / 0.4
  CHECK(std::get<DelayOptimalSpec>(PolicySpec::delay_optimal({10, 5, 0.2, 0.6}).variant()).rate == Rate::High);
  CHECK(PolicySpec::delay_optimal(kBase).as_threshold() == ThresholdPolicy::always_low());
}

TEST_CASE("rng streams") {
  StreamRng a(42, 0);
  StreamRng b(42, 0);
  StreamRng c(42, 1);
  int differ = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(same_bits(x, b.uniform()));
    differ += x != c.uniform() ? 1 : 0;
  }
  CHECK(differ > 990);
}

TEST_CASE("baselines land on their closed forms") {
  const SimEstimate low = simulate(PolicySpec::always_low(), kBase, 1'000'000, 10'000, 1);
  CHECK(within(low, 21.666666666666668));
  CHECK(low.stages == 990'000);
  CHECK(low.warmup_stages == 10'000);
  CHECK(low.avg_age == doctest::Approx(low.area / low.total_time).epsilon(1e-15));

  const SimEstimate high = simulate(PolicySpec::always_high(), {10, 8, 0.5, 0.5}, 1'000'000, 10'000, 2);
  CHECK(within(high, 20.0));

  const SystemParams p{2.1, 1, 0.4, 0.75};
  const SolveResult s = solve(p);
  const SimEstimate opt = simulate(PolicySpec::threshold(s.policy), p, 1'000'000, 10'000, 3);
  CHECK(within(opt, s.beta_star));
}

TEST_CASE("random policies match their renewal formula") {
  for (double q : {0.25, 0.5}) {
    const SimEstimate e = simulate(PolicySpec::random(q), kBase, 1'000'000, 10'000, 5);
    CHECK(within(e, testing_support::random_policy_age(q, kBase)));
  }
}

TEST_CASE("error-free link is deterministic") {
  const SystemParams perfect{10, 8, 0.0, 0.0};
  const SimEstimate low = simulate(PolicySpec::always_low(), perfect, 1000, 10, 9);
  CHECK(low.avg_age == doctest::Approx(15.0).epsilon(1e-14));
  CHECK(low.std_err == doctest::Approx(0.0));
  const SimEstimate high = simulate(PolicySpec::always_high(), perfect, 1000, 10, 9);
  CHECK(high.avg_age == doctest::Approx(12.0).epsilon(1e-14));
}

TEST_CASE("expected stage delay matches simulated time per stage") {
  const auto pol = ThresholdPolicy::type2(1, 1);
  const SimEstimate e = simulate(PolicySpec::threshold(pol), kBase, 1'000'000, 10'000, 13);
  const double per_stage = e.total_time / static_cast<double>(e.stages);
  CHECK(per_stage == doctest::Approx(expected_stage_delay(pol, kBase)).epsilon(2e-3));
}

TEST_CASE("determinism and streams") {
  const auto pol = PolicySpec::random(0.3);
  const SimEstimate a = simulate(pol, kBase, 100'000, 1'000, 77);
  const SimEstimate b = simulate(pol, kBase, 100'000, 1'000, 77);
  CHECK(same_bits(a.avg_age, b.avg_age));
  CHECK(same_bits(a.std_err, b.std_err));
  CHECK(same_bits(a.area, b.area));
  const SimEstimate c = simulate(pol, kBase, 100'000, 1'000, 78);
  CHECK_FALSE(same_bits(a.avg_age, c.avg_age));

  const auto single = compare({pol}, kBase, 100'000, 1'000, 77);
  REQUIRE(single.size() == 1);
  CHECK(same_bits(single[0].avg_age, a.avg_age));

  const auto two = compare({pol, pol}, kBase, 100'000, 1'000, 77);
  CHECK_FALSE(same_bits(two[0].avg_age, two[1].avg_age));
}

TEST_CASE("argument errors") {
  CHECK_THROWS_AS(simulate(PolicySpec::always_low(), kBase, 100, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(compare({}, kBase, 100, 10, 1), std::invalid_argument);
}

TEST_CASE("threshold policies agree with closed forms across a random sweep") {
  std::mt19937_64 rng(401);
  int inside = 0;
  const int runs = 100;
  for (int i = 0; i < runs; ++i) {
    const SystemParams p = testing_support::random_valid(rng);
    const int m = std::uniform_int_distribution<int>(0, 6)(rng);
    const bool type2 = i % 2 == 0;
    const int k = std::uniform_int_distribution<int>(0, type2 ? max_type2_offset(p) : 1)(rng);
    const ThresholdPolicy pol = type2 ? ThresholdPolicy::type2(m, k) : ThresholdPolicy::type1(m, k);
    const SimEstimate e = simulate(PolicySpec::threshold(pol), p, 200'000, 2'000, 1000 + i);
    inside += within(e, avg_age(pol, p)) ? 1 : 0;
  }
  MESSAGE(inside << "/" << runs << " runs within 3 standard errors");
  CHECK(inside >= 99);
}

TEST_CASE("a million stages take well under two seconds") {
  const auto start = std::chrono::steady_clock::now();
  simulate(PolicySpec::threshold(ThresholdPolicy::type2(15, 1)), {2.3, 1, 0.4, 0.75}, 1'000'000, 10'000, 4);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 2.0);
}
