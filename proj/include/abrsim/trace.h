#ifndef ABRSIM_TRACE_H_
#define ABRSIM_TRACE_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "abrsim/error.h"

namespace abrsim {

// Wi-Fi and HSPA one-way latencies of the emulated testbed.
inline constexpr double kWifiLatencySeconds = 0.02;
inline constexpr double kHspaLatencySeconds = 0.1;
inline constexpr double kDefaultOverheadFactor = 0.05;

struct TraceSample {
  double start_time = 0.0;       // seconds
  double throughput_kbps = 0.0;  // nominal, before protocol overhead

  bool operator==(const TraceSample&) const = default;
};

// Piecewise-constant available throughput. Each sample holds until the next
// sample's start time; the final sample holds until `duration` and, for
// download integration, indefinitely past it.
class BandwidthTrace {
 public:
  // Throws InvalidArgument unless the samples satisfy the trace invariants.
  BandwidthTrace(std::vector<TraceSample> samples, double duration,
                 double latency, double overhead_factor);

  std::span<const TraceSample> samples() const { return samples_; }
  double duration() const { return duration_; }
  double latency() const { return latency_; }
  double overhead_factor() const { return overhead_factor_; }

  // Nominal throughput at time `t`; times past the end use the final sample.
  double ThroughputAt(double t) const;
  double EffectiveThroughputAt(double t) const {
    return ThroughputAt(t) * (1.0 - overhead_factor_);
  }

  // Exact integral of nominal throughput over [from, to], in kilobits.
  // Defined for any 0 <= from <= to, extending the final sample past the end.
  double Integral(double from, double to) const;

  // Index of the sample in effect at time `t`.
  std::size_t SampleIndexAt(double t) const;

  BandwidthTrace WithLatency(double latency) const;
  BandwidthTrace WithOverhead(double overhead_factor) const;

  double MinThroughput() const;
  double MaxThroughput() const;

  bool operator==(const BandwidthTrace&) const = default;

 private:
  std::vector<TraceSample> samples_;
  // cumulative_[k] = integral from 0 to samples_[k].start_time.
  std::vector<double> cumulative_;
  double duration_;
  double latency_;
  double overhead_factor_;
};

// Reads the `time_s,throughput_kbps` CSV format. The last row's time is the
// trace duration. Throws TraceParseError naming the offending row.
BandwidthTrace LoadTrace(const std::string& path, double latency,
                         double overhead_factor = kDefaultOverheadFactor);
BandwidthTrace ParseTrace(std::istream& in, double latency,
                          double overhead_factor = kDefaultOverheadFactor);

// Writes the CSV format. A terminal row at `duration` is appended when the
// last sample starts earlier, so that loading restores the duration.
void WriteTrace(const BandwidthTrace& trace, std::ostream& out);
void SaveTrace(const BandwidthTrace& trace, const std::string& path);

// Mean nominal throughput over [from, to]; requires 0 <= from < to <= duration.
double AverageThroughput(const BandwidthTrace& trace, double from, double to);

// Time average over the whole trace.
double TimeAverage(const BandwidthTrace& trace);

// Multiplies every sample so the time average becomes `target_average`.
BandwidthTrace RescaleTrace(const BandwidthTrace& trace, double target_average);

struct WifiTraceParams {
  double mean_kbps = 2600.0;
  double amplitude_kbps = 150.0;
  double period_s = 20.0;
  double duration_s = 660.0;
  std::uint64_t seed = 1;

  bool operator==(const WifiTraceParams&) const = default;
};

// Narrow-band oscillation around the mean with seeded jitter, 1 s samples,
// bounded to [mean - amplitude, mean + amplitude]. Latency 20 ms.
BandwidthTrace GenerateWifiTrace(const WifiTraceParams& params);

struct HspaTraceParams {
  double mean_kbps = 2600.0;
  double duration_s = 660.0;
  double outage_rate = 0.02;  // outage onsets per second
  std::uint64_t seed = 1;

  bool operator==(const HspaTraceParams&) const = default;
};

// Wide-range process of plateaus and ramps with zero-throughput outages of
// 1-10 s, rescaled to the requested mean. Latency 100 ms.
BandwidthTrace GenerateHspaTrace(const HspaTraceParams& params);

}  // namespace abrsim

#endif  // ABRSIM_TRACE_H_
