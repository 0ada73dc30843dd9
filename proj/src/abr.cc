#include "abrsim/abr.h"

#include <algorithm>

#include <fmt/format.h>

namespace abrsim {

std::string_view PolicyName(Policy policy) {
  switch (policy) {
    case Policy::kBandwidthEstimation:
      return "bandwidth";
    case Policy::kBufferReactive:
      return "buffer";
    case Policy::kHybridBase:
      return "hybrid-base";
    case Policy::kHybridAdaptive:
      return "hybrid-adaptive";
  }
  return "unknown";
}

Policy ParsePolicy(std::string_view name) {
  for (auto p : {Policy::kBandwidthEstimation, Policy::kBufferReactive,
                 Policy::kHybridBase, Policy::kHybridAdaptive}) {
    if (PolicyName(p) == name) return p;
  }
  throw InvalidArgument(fmt::format("unknown policy '{}'", name));
}

AbrConfig AbrConfig::BandwidthEstimation() {
  AbrConfig config;
  config.policy = Policy::kBandwidthEstimation;
  return config;
}

AbrConfig AbrConfig::BufferReactive() {
  AbrConfig config;
  config.policy = Policy::kBufferReactive;
  return config;
}

AbrConfig AbrConfig::HybridBase() {
  AbrConfig config;
  config.policy = Policy::kHybridBase;
  config.b_max = 0.0;
  config.s_max = kUnboundedSwitches;
  return config;
}

AbrConfig AbrConfig::HybridAdaptive() {
  AbrConfig config;
  config.policy = Policy::kHybridAdaptive;
  config.b_max = 7.0;
  config.s_max = 10;
  return config;
}

void AbrConfig::Validate() const {
  if (!(delta_t > 0.0)) throw InvalidArgument("delta_t must be positive");
  if (!(delta_t_s > 0.0)) throw InvalidArgument("delta_t_s must be positive");
  if (!(b_min >= 0.0) || !(b_max >= 0.0)) {
    throw InvalidArgument("buffer thresholds must be nonnegative");
  }
  if (!(delta_l_fraction >= 0.0)) {
    throw InvalidArgument("delta_l_fraction must be nonnegative");
  }
  if (s_max < 0) throw InvalidArgument("s_max must be nonnegative");
  if ((policy == Policy::kBufferReactive ||
       policy == Policy::kHybridAdaptive) &&
      !(b_min < b_max)) {
    throw InvalidArgument(fmt::format("{} requires b_min < b_max",
                                      PolicyName(policy)));
  }
}

int AbrState::SwitchesInWindow(double now, double window) const {
  return static_cast<int>(std::count_if(
      switch_times.begin(), switch_times.end(),
      [&](double t) { return now - window < t && t <= now; }));
}

int DecideBandwidth(const AbrState& state, double v_b, double n_b,
                    const AbrConfig& config, const BitrateLadder& ladder) {
  int q = state.q;
  if (v_b < n_b - config.DeltaL(n_b)) {
    if (q < ladder.max_level()) ++q;
  }
  v_b = ladder.BitrateOf(q);
  if (v_b > n_b) {
    if (q > ladder.min_level()) --q;
  }
  return std::clamp(q, ladder.min_level(), ladder.max_level());
}

int DecideBuffer(const AbrState& state, double b, const AbrConfig& config,
                 const BitrateLadder& ladder) {
  int q = state.q;
  if (config.b_max < b) {
    if (q < ladder.max_level()) ++q;
  }
  if (b < config.b_min) {
    if (q > ladder.min_level()) --q;
  }
  return std::clamp(q, ladder.min_level(), ladder.max_level());
}

int DecideHybrid(const AbrState& state, double v_b, double n_b, double b,
                 double now, const AbrConfig& config,
                 const BitrateLadder& ladder) {
  int q = state.q;
  if (v_b < n_b - config.DeltaL(n_b) && config.b_max < b) {
    if (state.SwitchesInWindow(now, config.delta_t_s) < config.s_max) {
      if (q < ladder.max_level()) ++q;
    }
  }
  v_b = ladder.BitrateOf(q);
  if (v_b > n_b || b < config.b_min) {
    if (q > ladder.min_level()) --q;
  }
  return std::clamp(q, ladder.min_level(), ladder.max_level());
}

int Decide(const AbrState& state, const DecisionInputs& in,
           const AbrConfig& config, const BitrateLadder& ladder) {
  const double v_b = ladder.BitrateOf(state.q);
  switch (config.policy) {
    case Policy::kBandwidthEstimation:
      return DecideBandwidth(state, v_b, in.n_b, config, ladder);
    case Policy::kBufferReactive:
      return DecideBuffer(state, in.buffer, config, ladder);
    case Policy::kHybridBase:
    case Policy::kHybridAdaptive:
      return DecideHybrid(state, v_b, in.n_b, in.buffer, in.now, config,
                          ladder);
  }
  return state.q;
}

AbrState RecordSwitch(AbrState state, int old_q, int new_q, double now,
                      double delta_t_s) {
  if (old_q == new_q) {
    throw InvalidArgument("RecordSwitch called without a level change");
  }
  if (!state.switch_times.empty() && now < state.switch_times.back()) {
    throw InvalidArgument("switch times must be nondecreasing");
  }
  std::erase_if(state.switch_times,
                [&](double t) { return t <= now - delta_t_s; });
  state.switch_times.push_back(now);
  state.q = new_q;
  return state;
}

}  // namespace abrsim
