#ifndef ABRSIM_ABR_H_
#define ABRSIM_ABR_H_

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "abrsim/media.h"

namespace abrsim {

enum class Policy { kBandwidthEstimation, kBufferReactive, kHybridBase, kHybridAdaptive };

std::string_view PolicyName(Policy policy);
// Accepts the names returned by PolicyName. Throws InvalidArgument otherwise.
Policy ParsePolicy(std::string_view name);

inline constexpr int kUnboundedSwitches = std::numeric_limits<int>::max();

struct AbrConfig {
  Policy policy = Policy::kBandwidthEstimation;
  double delta_t = 4.0;            // throughput window, s
  double delta_l_fraction = 0.25;  // dead band as a fraction of n_b
  double b_min = 3.0;              // s
  double b_max = 7.0;              // s
  int s_max = kUnboundedSwitches;  // switches allowed per delta_t_s
  double delta_t_s = 10.0;         // switch-count window, s

  // Parameter sets used in the evaluation.
  static AbrConfig BandwidthEstimation();
  static AbrConfig BufferReactive();
  static AbrConfig HybridBase();
  static AbrConfig HybridAdaptive();

  // Throws InvalidArgument when an invariant does not hold.
  void Validate() const;

  double DeltaL(double n_b) const { return delta_l_fraction * n_b; }

  bool operator==(const AbrConfig&) const = default;
};

struct AbrState {
  int q = 0;
  std::vector<double> switch_times;

  // Switches in (now - window, now].
  int SwitchesInWindow(double now, double window) const;

  bool operator==(const AbrState&) const = default;
};

// Up and down tests run in sequence; the down test re-reads the bitrate
// after a possible up-switch, so an up-switch can be undone at once.
int DecideBandwidth(const AbrState& state, double v_b, double n_b,
                    const AbrConfig& config, const BitrateLadder& ladder);

// Buffer cushion: up above b_max, down below b_min, hold in between.
int DecideBuffer(const AbrState& state, double b, const AbrConfig& config,
                 const BitrateLadder& ladder);

// Up requires bandwidth headroom, b > b_max and fewer than s_max recent
// switches; down fires on v_b > n_b or b < b_min. The switch limiter gates
// only the up branch.
int DecideHybrid(const AbrState& state, double v_b, double n_b, double b,
                 double now, const AbrConfig& config,
                 const BitrateLadder& ladder);

struct DecisionInputs {
  double n_b = 0.0;     // measured bandwidth, kbit/s
  double buffer = 0.0;  // seconds buffered
  double now = 0.0;
};

// Dispatches on config.policy with v_b read from the ladder at state.q.
int Decide(const AbrState& state, const DecisionInputs& inputs,
           const AbrConfig& config, const BitrateLadder& ladder);

// Appends `now` to the switch history, pruning entries that can no longer
// fall inside the switch window. Throws InvalidArgument if old_q == new_q.
AbrState RecordSwitch(AbrState state, int old_q, int new_q, double now,
                      double delta_t_s);

}  // namespace abrsim

#endif  // ABRSIM_ABR_H_
