#ifndef ABRSIM_NETSIM_H_
#define ABRSIM_NETSIM_H_

#include <vector>

#include "abrsim/trace.h"

namespace abrsim {

struct DownloadRecord {
  int segment_index = 0;
  int level = 0;
  double bytes = 0.0;
  double request_time = 0.0;
  double completion_time = 0.0;
  double measured_throughput = 0.0;  // kbit/s, latency included

  double duration() const { return completion_time - request_time; }
  bool operator==(const DownloadRecord&) const = default;
};

// Fluid-flow transfer of `bytes` over the trace's effective throughput,
// starting one latency after `request_time`. Outages defer completion.
// Throws DownloadStarved if the trace ends at zero throughput with bytes
// still outstanding, InvalidArgument for bytes <= 0 or request_time < 0.
DownloadRecord DownloadSegment(const BandwidthTrace& trace, double bytes,
                               double request_time, int segment_index = 0,
                               int level = 0);

// Sliding-window mean of per-download throughput.
class ThroughputMeter {
 public:
  explicit ThroughputMeter(double window_s);

  // Records must arrive in completion order.
  void Add(const DownloadRecord& record);

  // Mean measured throughput of records completed in (now - window, now].
  // Falls back to the most recent record when the window is empty; throws
  // InvalidArgument when no download has completed yet.
  double Estimate(double now) const;

  double window() const { return window_; }
  const std::vector<DownloadRecord>& history() const { return history_; }

 private:
  double window_;
  std::vector<DownloadRecord> history_;
};

inline double GetNetworkBandwidth(const ThroughputMeter& meter, double now) {
  return meter.Estimate(now);
}

}  // namespace abrsim

#endif  // ABRSIM_NETSIM_H_
