#include "abrsim/trace.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string_view>

#include <fmt/format.h>

#include "random.h"

namespace abrsim {

namespace {

constexpr std::string_view kTraceHeader = "time_s,throughput_kbps";

bool ParseDouble(std::string_view text, double& value) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

// Collapses runs of equal throughput into one sample.
std::vector<TraceSample> MergeRuns(const std::vector<double>& per_second) {
  std::vector<TraceSample> samples;
  for (std::size_t k = 0; k < per_second.size(); ++k) {
    if (samples.empty() || samples.back().throughput_kbps != per_second[k]) {
      samples.push_back({static_cast<double>(k), per_second[k]});
    }
  }
  return samples;
}

}  // namespace

BandwidthTrace::BandwidthTrace(std::vector<TraceSample> samples,
                               double duration, double latency,
                               double overhead_factor)
    : samples_(std::move(samples)),
      duration_(duration),
      latency_(latency),
      overhead_factor_(overhead_factor) {
  if (samples_.empty()) throw InvalidArgument("trace has no samples");
  if (samples_.front().start_time != 0.0) {
    throw InvalidArgument("first trace sample must start at 0");
  }
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    const auto& s = samples_[k];
    if (!std::isfinite(s.throughput_kbps) || s.throughput_kbps < 0.0) {
      throw InvalidArgument(fmt::format("negative throughput at sample {}", k));
    }
    if (k > 0 && !(s.start_time > samples_[k - 1].start_time)) {
      throw InvalidArgument(
          fmt::format("sample {} does not start after its predecessor", k));
    }
  }
  if (!std::isfinite(duration_) || duration_ < samples_.back().start_time) {
    throw InvalidArgument("trace duration precedes its last sample");
  }
  if (!(latency_ >= 0.0) || !std::isfinite(latency_)) {
    throw InvalidArgument("latency must be nonnegative");
  }
  if (!(overhead_factor_ >= 0.0 && overhead_factor_ <= 0.5)) {
    throw InvalidArgument("overhead factor must lie in [0, 0.5]");
  }
  cumulative_.resize(samples_.size());
  cumulative_[0] = 0.0;
  for (std::size_t k = 1; k < samples_.size(); ++k) {
    cumulative_[k] = cumulative_[k - 1] +
                     samples_[k - 1].throughput_kbps *
                         (samples_[k].start_time - samples_[k - 1].start_time);
  }
}

std::size_t BandwidthTrace::SampleIndexAt(double t) const {
  auto it = std::upper_bound(
      samples_.begin(), samples_.end(), t,
      [](double time, const TraceSample& s) { return time < s.start_time; });
  if (it == samples_.begin()) return 0;
  return static_cast<std::size_t>(it - samples_.begin()) - 1;
}

double BandwidthTrace::ThroughputAt(double t) const {
  return samples_[SampleIndexAt(t)].throughput_kbps;
}

double BandwidthTrace::Integral(double from, double to) const {
  auto primitive = [this](double t) {
    const std::size_t k = SampleIndexAt(t);
    return cumulative_[k] +
           samples_[k].throughput_kbps * (t - samples_[k].start_time);
  };
  if (!(from >= 0.0) || !(to >= from)) {
    throw InvalidArgument("integration interval must satisfy 0 <= from <= to");
  }
  return primitive(to) - primitive(from);
}

BandwidthTrace BandwidthTrace::WithLatency(double latency) const {
  return BandwidthTrace(samples_, duration_, latency, overhead_factor_);
}

BandwidthTrace BandwidthTrace::WithOverhead(double overhead_factor) const {
  return BandwidthTrace(samples_, duration_, latency_, overhead_factor);
}

double BandwidthTrace::MinThroughput() const {
  return std::min_element(samples_.begin(), samples_.end(),
                          [](const auto& a, const auto& b) {
                            return a.throughput_kbps < b.throughput_kbps;
                          })
      ->throughput_kbps;
}

double BandwidthTrace::MaxThroughput() const {
  return std::max_element(samples_.begin(), samples_.end(),
                          [](const auto& a, const auto& b) {
                            return a.throughput_kbps < b.throughput_kbps;
                          })
      ->throughput_kbps;
}

BandwidthTrace ParseTrace(std::istream& in, double latency,
                          double overhead_factor) {
  std::string line;
  std::size_t row = 0;
  bool saw_header = false;
  std::vector<TraceSample> samples;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != kTraceHeader) {
        throw ParseError(
            fmt::format("row {}: expected header '{}'", row, kTraceHeader), row);
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    TraceSample sample;
    if (comma == std::string::npos ||
        line.find(',', comma + 1) != std::string::npos ||
        !ParseDouble(std::string_view(line).substr(0, comma),
                     sample.start_time) ||
        !ParseDouble(std::string_view(line).substr(comma + 1),
                     sample.throughput_kbps)) {
      throw ParseError(fmt::format("row {}: malformed sample '{}'", row, line),
                       row);
    }
    if (sample.throughput_kbps < 0.0) {
      throw ParseError(fmt::format("row {}: negative throughput", row), row);
    }
    if (samples.empty() && sample.start_time != 0.0) {
      throw ParseError(fmt::format("row {}: first sample must be at 0 s", row),
                       row);
    }
    if (!samples.empty() && !(sample.start_time > samples.back().start_time)) {
      throw ParseError(
          fmt::format("row {}: time does not increase monotonically", row),
          row);
    }
    samples.push_back(sample);
  }
  if (!saw_header) throw ParseError("empty trace file", 0);
  if (samples.empty()) throw ParseError("trace file has no samples", row);
  if (samples.size() < 2) {
    throw ParseError("trace must span a positive duration (need two rows)",
                     row);
  }
  const double duration = samples.back().start_time;
  return BandwidthTrace(std::move(samples), duration, latency, overhead_factor);
}

BandwidthTrace LoadTrace(const std::string& path, double latency,
                         double overhead_factor) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open trace file " + path);
  return ParseTrace(in, latency, overhead_factor);
}

void WriteTrace(const BandwidthTrace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& s : trace.samples()) {
    out << fmt::format("{},{}\n", s.start_time, s.throughput_kbps);
  }
  const auto& last = trace.samples().back();
  if (last.start_time < trace.duration()) {
    out << fmt::format("{},{}\n", trace.duration(), last.throughput_kbps);
  }
}

void SaveTrace(const BandwidthTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write trace file " + path);
  WriteTrace(trace, out);
  if (!out) throw InvalidArgument("failed writing trace file " + path);
}

double AverageThroughput(const BandwidthTrace& trace, double from, double to) {
  if (!(from >= 0.0 && from < to && to <= trace.duration())) {
    throw InvalidArgument(fmt::format(
        "interval [{}, {}] outside trace of duration {}", from, to,
        trace.duration()));
  }
  return trace.Integral(from, to) / (to - from);
}

double TimeAverage(const BandwidthTrace& trace) {
  return AverageThroughput(trace, 0.0, trace.duration());
}

BandwidthTrace RescaleTrace(const BandwidthTrace& trace,
                            double target_average) {
  if (!(target_average > 0.0)) {
    throw InvalidArgument("target average must be positive");
  }
  const double average = TimeAverage(trace);
  if (!(average > 0.0)) {
    throw InvalidArgument("cannot rescale a trace with zero average");
  }
  const double factor = target_average / average;
  std::vector<TraceSample> scaled(trace.samples().begin(),
                                  trace.samples().end());
  for (auto& s : scaled) s.throughput_kbps *= factor;
  return BandwidthTrace(std::move(scaled), trace.duration(), trace.latency(),
                        trace.overhead_factor());
}

BandwidthTrace GenerateWifiTrace(const WifiTraceParams& p) {
  if (!(p.amplitude_kbps >= 0.0) || !(p.mean_kbps > p.amplitude_kbps)) {
    throw InvalidArgument("wifi trace requires mean > amplitude >= 0");
  }
  if (!(p.period_s > 0.0)) throw InvalidArgument("period must be positive");
  if (!(p.duration_s > 0.0)) throw InvalidArgument("duration must be positive");

  internal::Rng rng(p.seed);
  const double phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
  const auto n = static_cast<std::size_t>(std::ceil(p.duration_s));
  std::vector<double> per_second(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double wave = std::sin(2.0 * std::numbers::pi *
                                     static_cast<double>(k) / p.period_s +
                                 phase);
    const double jitter = rng.Uniform(-1.0, 1.0);
    // |0.7 wave + 0.3 jitter| <= 1, so the band is never left.
    per_second[k] = p.mean_kbps + p.amplitude_kbps * (0.7 * wave + 0.3 * jitter);
  }
  return BandwidthTrace(MergeRuns(per_second), p.duration_s,
                        kWifiLatencySeconds, kDefaultOverheadFactor);
}

BandwidthTrace GenerateHspaTrace(const HspaTraceParams& p) {
  if (!(p.duration_s > 0.0)) throw InvalidArgument("duration must be positive");
  if (!(p.mean_kbps > 0.0)) throw InvalidArgument("mean must be positive");
  if (!(p.outage_rate >= 0.0)) {
    throw InvalidArgument("outage rate must be nonnegative");
  }

  internal::Rng rng(p.seed);
  const auto n = static_cast<std::size_t>(std::ceil(p.duration_s));
  std::vector<double> per_second;
  per_second.reserve(n);

  // Plateau and ramp regimes over a wide range relative to the mean.
  double level = p.mean_kbps * rng.Uniform(0.6, 1.4);
  while (per_second.size() < n) {
    const int length = rng.UniformInt(3, 20);
    const double target = p.mean_kbps * rng.Uniform(0.1, 2.5);
    const bool ramp = rng.Bernoulli(0.5);
    for (int k = 1; k <= length && per_second.size() < n; ++k) {
      per_second.push_back(ramp ? level + (target - level) * k / length
                                : target);
    }
    level = target;
  }

  // Fading outages of 1-10 s at exactly zero throughput. The final second
  // stays up so the extended tail of the trace never starves a download.
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (p.outage_rate > 0.0 && rng.Bernoulli(p.outage_rate)) {
      const auto length = static_cast<std::size_t>(rng.UniformInt(1, 10));
      for (std::size_t j = k; j < std::min(n - 1, k + length); ++j) {
        per_second[j] = 0.0;
      }
      k += length;
    }
  }

  // Guarantee a burst of at least twice the average.
  const double total = [&] {
    double sum = 0.0;
    for (double v : per_second) sum += v;
    return sum;
  }();
  const auto peak = static_cast<std::size_t>(
      std::max_element(per_second.begin(), per_second.end()) -
      per_second.begin());
  const double count = static_cast<double>(n);
  if (per_second[peak] < 2.0 * total / count && count > 2.1) {
    const double rest = total - per_second[peak];
    per_second[peak] = 2.1 * rest / (count - 2.1);
  }

  // The per-second grid spans ceil(duration) seconds; trim the final sample to
  // the requested duration before rescaling.
  BandwidthTrace raw(MergeRuns(per_second), p.duration_s, kHspaLatencySeconds,
                     kDefaultOverheadFactor);
  return RescaleTrace(raw, p.mean_kbps);
}

}  // namespace abrsim
