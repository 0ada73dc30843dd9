#include "abrsim/netsim.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace abrsim {

DownloadRecord DownloadSegment(const BandwidthTrace& trace, double bytes,
                               double request_time, int segment_index,
                               int level) {
  if (!(bytes > 0.0)) throw InvalidArgument("segment size must be positive");
  if (!(request_time >= 0.0)) {
    throw InvalidArgument("request time must be nonnegative");
  }
  const auto samples = trace.samples();
  const double scale = 1.0 - trace.overhead_factor();
  double remaining = bytes * 8.0 / 1000.0;  // kilobits
  double now = request_time + trace.latency();
  double completion = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t k = trace.SampleIndexAt(now); k < samples.size(); ++k) {
    const double rate = samples[k].throughput_kbps * scale;
    const bool last = k + 1 == samples.size();
    const double end = last ? std::numeric_limits<double>::infinity()
                            : samples[k + 1].start_time;
    if (rate > 0.0) {
      const double needed = remaining / rate;
      if (now + needed <= end) {
        completion = now + needed;
        break;
      }
      remaining -= rate * (end - now);
    } else if (last) {
      throw DownloadStarved(fmt::format(
          "download of segment {} starves: trace is empty from {} s on",
          segment_index, samples[k].start_time));
    }
    now = end;
  }

  DownloadRecord record;
  record.segment_index = segment_index;
  record.level = level;
  record.bytes = bytes;
  record.request_time = request_time;
  record.completion_time = completion;
  record.measured_throughput =
      bytes * 8.0 / 1000.0 / (completion - request_time);
  return record;
}

ThroughputMeter::ThroughputMeter(double window_s) : window_(window_s) {
  if (!(window_s > 0.0)) {
    throw InvalidArgument("throughput window must be positive");
  }
}

void ThroughputMeter::Add(const DownloadRecord& record) {
  if (!history_.empty() &&
      record.completion_time < history_.back().completion_time) {
    throw InvalidArgument("download records must arrive in completion order");
  }
  history_.push_back(record);
}

double ThroughputMeter::Estimate(double now) const {
  if (history_.empty()) {
    throw InvalidArgument("no completed download to estimate throughput from");
  }
  double sum = 0.0;
  int count = 0;
  // History is sorted by completion time; walk back from the newest record.
  for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
    if (it->completion_time > now) continue;
    if (!(it->completion_time > now - window_)) break;
    sum += it->measured_throughput;
    ++count;
  }
  if (count == 0) return history_.back().measured_throughput;
  return sum / count;
}

}  // namespace abrsim
