#ifndef ABRSIM_METRICS_H_
#define ABRSIM_METRICS_H_

#include <vector>

#include "abrsim/media.h"
#include "abrsim/session.h"
#include "abrsim/trace.h"

namespace abrsim {

struct QoeReport {
  double st = 0.0;  // stalling time, s
  int re = 0;       // re-buffering events
  double te = 0.0;  // throughput efficiency in [0, 1]
  int sn = 0;       // quality switches
  std::vector<int> oracle_levels;

  bool operator==(const QoeReport&) const = default;
};

// Sum of (actual - scheduled) playback time per chunk. Initial buffering
// precedes chunk 0 and is not counted. Throws InvalidArgument on an
// incomplete log.
double StallingTime(const SessionLog& log);

// Chunks whose playback took longer than scheduled.
int RebufferCount(const SessionLog& log);

// Highest level whose bitrate fits the effective mean throughput over each
// chunk's wall-clock playback window, floored at level 0. Windows reaching
// past the trace end are clamped to it.
std::vector<int> OracleQuality(const BandwidthTrace& trace,
                               const SessionLog& log,
                               const BitrateLadder& ladder);

// Duration-weighted mean of min(1, (q_i + 1) / (Q_i + 1)). Levels are
// compared one-based so that honest lowest-level play is not scored zero.
double ThroughputEfficiency(const SessionLog& log,
                            const std::vector<int>& oracle);

// Sum of |q_{i+1} - q_i| over consecutive played chunks.
int SwitchCount(const SessionLog& log);

QoeReport ComputeQoe(const SessionLog& log, const BandwidthTrace& trace,
                     const BitrateLadder& ladder);

}  // namespace abrsim

#endif  // ABRSIM_METRICS_H_
