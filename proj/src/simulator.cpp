#include "aoirate/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace aoirate {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31U);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

PolicySpec PolicySpec::random(double p_low) {
  if (!(p_low >= 0.0 && p_low <= 1.0)) {
    throw std::invalid_argument("random policy probability must lie in [0, 1]");
  }
  return PolicySpec(RandomSpec{p_low});
}

PolicySpec PolicySpec::delay_optimal(const SystemParams& params) {
  const bool low = mean_delay(params, Rate::Low) < mean_delay(params, Rate::High);
  return PolicySpec(DelayOptimalSpec{low ? Rate::Low : Rate::High});
}

std::string PolicySpec::name() const {
  return std::visit(Overloaded{[](const ThresholdSpec& s) { return to_string(s.policy); },
                               [](const AlwaysLowSpec&) { return std::string("always-low"); },
                               [](const AlwaysHighSpec&) { return std::string("always-high"); },
                               [](const RandomSpec& s) {
                                 char buf[32];
                                 std::snprintf(buf, sizeof buf, "random(%g)", s.p_low);
                                 return std::string(buf);
                               },
                               [](const DelayOptimalSpec&) { return std::string("delay-optimal"); }},
                    variant_);
}

std::optional<ThresholdPolicy> PolicySpec::as_threshold() const {
  return std::visit(
      Overloaded{[](const ThresholdSpec& s) -> std::optional<ThresholdPolicy> { return s.policy; },
                 [](const AlwaysLowSpec&) -> std::optional<ThresholdPolicy> { return ThresholdPolicy::always_low(); },
                 [](const AlwaysHighSpec&) -> std::optional<ThresholdPolicy> {
                   return ThresholdPolicy::always_high();
                 },
                 [](const RandomSpec&) -> std::optional<ThresholdPolicy> { return std::nullopt; },
                 [](const DelayOptimalSpec& s) -> std::optional<ThresholdPolicy> {
                   return s.rate == Rate::Low ? ThresholdPolicy::always_low() : ThresholdPolicy::always_high();
                 }},
      variant_);
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

double StreamRng::uniform() { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }

Rate decide(const PolicySpec& policy, const AgeState& state, StreamRng& rng) {
  return std::visit(Overloaded{[&](const ThresholdSpec& s) { return threshold_action(s.policy, state); },
                               [](const AlwaysLowSpec&) { return Rate::Low; },
                               [](const AlwaysHighSpec&) { return Rate::High; },
                               [&](const RandomSpec& s) { return rng.uniform() < s.p_low ? Rate::Low : Rate::High; },
                               [](const DelayOptimalSpec& s) { return s.rate; }},
                    policy.variant());
}

SimEstimate simulate(const PolicySpec& policy, const SystemParams& params, std::uint64_t stages,
                     std::uint64_t warmup, std::uint64_t seed, std::uint64_t stream) {
  if (stages <= warmup) {
    throw std::invalid_argument("stages must exceed warmup");
  }
  StreamRng rng(seed, stream);
  AgeState state = AgeState::reset(Rate::High);

  const std::uint64_t measured = stages - warmup;
  const std::uint64_t batch_len = std::max<std::uint64_t>(measured / kBatchCount, 1);
  std::vector<double> batch_area;
  std::vector<double> batch_time;
  batch_area.reserve(kBatchCount);
  batch_time.reserve(kBatchCount);
  double area = 0.0;
  double time = 0.0;

  for (std::uint64_t i = 0; i < stages; ++i) {
    const Rate rate = decide(policy, state, rng);
    const double d = params.delay(rate);
    const bool success = rng.uniform() >= params.error_prob(rate);
    if (i >= warmup) {
      const std::uint64_t j = i - warmup;
      // remainder stages fold into the last batch
      if (j % batch_len == 0 && batch_area.size() < static_cast<std::size_t>(kBatchCount)) {
        batch_area.push_back(0.0);
        batch_time.push_back(0.0);
      }
      const double q = state.value(params) * d + 0.5 * d * d;
      batch_area.back() += q;
      batch_time.back() += d;
    }
    state = state.next(rate, success);
  }
  for (std::size_t b = 0; b < batch_area.size(); ++b) {
    area += batch_area[b];
    time += batch_time[b];
  }

  SimEstimate out;
  out.avg_age = area / time;
  out.area = area;
  out.total_time = time;
  out.stages = measured;
  out.seed = seed;
  out.warmup_stages = warmup;

  const auto nb = static_cast<double>(batch_area.size());
  if (batch_area.size() > 1) {
    const double mean_time = time / nb;
    double ss = 0.0;
    for (std::size_t b = 0; b < batch_area.size(); ++b) {
      const double resid = batch_area[b] - out.avg_age * batch_time[b];
      ss += resid * resid;
    }
    out.std_err = std::sqrt(ss / (nb - 1.0) / nb) / mean_time;
  }
  return out;
}

std::vector<SimEstimate> compare(const std::vector<PolicySpec>& policies, const SystemParams& params,
                                 std::uint64_t stages, std::uint64_t warmup, std::uint64_t seed) {
  if (policies.empty()) {
    throw std::invalid_argument("compare needs at least one policy");
  }
  std::vector<SimEstimate> out;
  out.reserve(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    out.push_back(simulate(policies[i], params, stages, warmup, seed, i));
  }
  return out;
}

}  // namespace aoirate
