#ifndef ABRSIM_HARNESS_H_
#define ABRSIM_HARNESS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abrsim/abr.h"
#include "abrsim/media.h"
#include "abrsim/metrics.h"
#include "abrsim/session.h"
#include "abrsim/trace.h"

namespace abrsim {

enum class TraceSource { kFile, kWifiGen, kHspaGen };

struct PolicySpec {
  std::string name;
  AbrConfig config;

  bool operator==(const PolicySpec&) const = default;
};

struct TraceSpec {
  std::string id;
  TraceSource source = TraceSource::kWifiGen;
  std::string path;  // kFile only
  // Generator parameters; the seed is taken from the plan's seed list.
  WifiTraceParams wifi;
  HspaTraceParams hspa;
  std::optional<double> latency;  // overrides the source default
  double overhead_factor = kDefaultOverheadFactor;
  std::vector<double> target_averages;

  bool operator==(const TraceSpec&) const = default;
};

struct VideoSpec {
  std::string id;
  VideoParams params;
  std::string sizes_file;  // optional pinned sizes

  bool operator==(const VideoSpec&) const = default;
};

struct SessionOverrides {
  std::optional<double> startup_threshold;
  std::optional<double> rebuffer_threshold;
  std::optional<double> buffer_capacity;

  bool operator==(const SessionOverrides&) const = default;
};

struct ExperimentPlan {
  std::vector<PolicySpec> policies;
  std::vector<TraceSpec> traces;
  std::vector<VideoSpec> videos;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  SessionOverrides session;

  // Throws InvalidArgument unless every list is non-empty and valid.
  void Validate() const;

  bool operator==(const ExperimentPlan&) const = default;
};

ExperimentPlan ParsePlan(const std::string& json_text);
ExperimentPlan LoadPlan(const std::string& path);
std::string PlanToJson(const ExperimentPlan& plan);

// The four evaluated policies with their published parameters.
std::vector<PolicySpec> StandardPolicies();

struct ResultRow {
  std::string policy;
  std::string trace_id;
  double target_avg_kbps = 0.0;
  std::string video_id;
  std::uint64_t seed = 0;
  double st = 0.0;
  int re = 0;
  double te = 0.0;
  int sn = 0;
  bool complete = true;

  bool operator==(const ResultRow&) const = default;
};

// Plan coordinates ordering used for every output table.
bool RowLess(const ResultRow& a, const ResultRow& b);

// Trace for one plan coordinate: generated or loaded, then rescaled.
BandwidthTrace BuildTrace(const TraceSpec& spec, std::uint64_t seed,
                          double target_average);
VideoModel MakeVideo(const VideoSpec& spec);
SessionOptions ResolveSessionOptions(const SessionOverrides& overrides,
                                     const AbrConfig& config,
                                     const VideoModel& video);

struct MatrixOptions {
  int jobs = 1;
  // Per-session JSON log, chunk CSV and timeseries CSV under sessions/.
  bool write_session_files = true;
};

// Runs every (policy, trace, target, video, seed) session. When the plan has
// an output directory, writes results.csv and the per-session files there.
// Results are sorted with RowLess regardless of scheduling.
std::vector<ResultRow> RunMatrix(const ExperimentPlan& plan,
                                 const MatrixOptions& options = {});

std::string ResultsToCsv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> ParseResultsCsv(const std::string& csv);

struct MetricSummary {
  int n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;

  bool operator==(const MetricSummary&) const = default;
};

// Order statistics with linear interpolation between closest ranks.
MetricSummary SummarizeValues(std::vector<double> values);

struct SummaryRow {
  std::string policy;
  std::string trace_id;
  double target_avg_kbps = 0.0;
  MetricSummary st;
  MetricSummary re;
  MetricSummary te;
  MetricSummary sn;

  bool operator==(const SummaryRow&) const = default;
};

// Aggregates completed rows per (policy, target average, environment).
std::vector<SummaryRow> Summarize(const std::vector<ResultRow>& rows);
std::string SummaryToCsv(const std::vector<SummaryRow>& rows);

std::string SessionFileStem(const ResultRow& row);

}  // namespace abrsim

#endif  // ABRSIM_HARNESS_H_
