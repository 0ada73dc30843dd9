#include "abrsim/metrics.h"

#include <algorithm>
#include <cstdlib>

#include <fmt/format.h>

namespace abrsim {

namespace {

void RequireComplete(const SessionLog& log) {
  if (!log.complete) {
    throw InvalidArgument("metrics need a complete session log");
  }
}

}  // namespace

double StallingTime(const SessionLog& log) {
  RequireComplete(log);
  double total = 0.0;
  for (const auto& c : log.chunk_playbacks) {
    total += c.actual_duration - c.scheduled_duration;
  }
  return total;
}

int RebufferCount(const SessionLog& log) {
  RequireComplete(log);
  return static_cast<int>(std::count_if(
      log.chunk_playbacks.begin(), log.chunk_playbacks.end(),
      [](const ChunkPlayback& c) {
        return c.actual_duration > c.scheduled_duration;
      }));
}

std::vector<int> OracleQuality(const BandwidthTrace& trace,
                               const SessionLog& log,
                               const BitrateLadder& ladder) {
  const double scale = 1.0 - trace.overhead_factor();
  std::vector<int> oracle;
  oracle.reserve(log.chunk_playbacks.size());
  for (const auto& c : log.chunk_playbacks) {
    double from = c.start_wall_time;
    double to = c.start_wall_time + c.actual_duration;
    double available;
    if (from >= trace.duration()) {
      available = trace.ThroughputAt(from);
    } else {
      to = std::min(to, trace.duration());
      available = AverageThroughput(trace, from, to);
    }
    available *= scale;
    int level = ladder.min_level();
    for (int q = ladder.max_level(); q >= ladder.min_level(); --q) {
      if (ladder.BitrateOf(q) <= available) {
        level = q;
        break;
      }
    }
    oracle.push_back(level);
  }
  return oracle;
}

double ThroughputEfficiency(const SessionLog& log,
                            const std::vector<int>& oracle) {
  if (oracle.size() != log.chunk_playbacks.size()) {
    throw InvalidArgument(fmt::format(
        "oracle has {} levels for {} chunks", oracle.size(),
        log.chunk_playbacks.size()));
  }
  if (oracle.empty()) throw InvalidArgument("no chunks were played");
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    const auto& c = log.chunk_playbacks[i];
    const double ratio = std::min(
        1.0, static_cast<double>(c.level + 1) / (oracle[i] + 1));
    weighted += ratio * c.scheduled_duration;
    total += c.scheduled_duration;
  }
  return weighted / total;
}

int SwitchCount(const SessionLog& log) {
  if (log.chunk_playbacks.empty()) {
    throw InvalidArgument("switch count needs at least one chunk");
  }
  int switches = 0;
  for (std::size_t i = 1; i < log.chunk_playbacks.size(); ++i) {
    switches += std::abs(log.chunk_playbacks[i].level -
                         log.chunk_playbacks[i - 1].level);
  }
  return switches;
}

QoeReport ComputeQoe(const SessionLog& log, const BandwidthTrace& trace,
                     const BitrateLadder& ladder) {
  QoeReport report;
  report.st = StallingTime(log);
  report.re = RebufferCount(log);
  report.oracle_levels = OracleQuality(trace, log, ladder);
  report.te = ThroughputEfficiency(log, report.oracle_levels);
  report.sn = SwitchCount(log);
  return report;
}

}  // namespace abrsim
