#include "abrsim/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string_view>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

namespace abrsim {

namespace {

constexpr std::string_view kResultsHeader =
    "policy,trace_id,target_avg_kbps,video_id,seed,st_s,re,te,sn,complete";

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view SourceName(TraceSource source) {
  switch (source) {
    case TraceSource::kFile:
      return "file";
    case TraceSource::kWifiGen:
      return "wifi-gen";
    case TraceSource::kHspaGen:
      return "hspa-gen";
  }
  return "unknown";
}

TraceSource ParseSource(const std::string& name) {
  for (auto s : {TraceSource::kFile, TraceSource::kWifiGen,
                 TraceSource::kHspaGen}) {
    if (SourceName(s) == name) return s;
  }
  throw InvalidArgument(fmt::format("unknown trace source '{}'", name));
}

template <typename T>
void ReadOptional(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

PolicySpec ParsePolicySpec(const json& j) {
  if (j.is_string()) {
    const Policy policy = ParsePolicy(j.get<std::string>());
    for (auto& spec : StandardPolicies()) {
      if (spec.config.policy == policy) return spec;
    }
  }
  PolicySpec spec;
  j.at("name").get_to(spec.name);
  const std::string kind = j.value("policy", spec.name);
  const Policy policy = ParsePolicy(kind);
  for (auto& standard : StandardPolicies()) {
    if (standard.config.policy == policy) spec.config = standard.config;
  }
  auto& c = spec.config;
  ReadOptional(j, "delta_t", c.delta_t);
  ReadOptional(j, "delta_l_fraction", c.delta_l_fraction);
  ReadOptional(j, "b_min", c.b_min);
  ReadOptional(j, "b_max", c.b_max);
  ReadOptional(j, "delta_t_s", c.delta_t_s);
  if (j.contains("s_max")) {
    const auto& s = j.at("s_max");
    if (s.is_string() && s.get<std::string>() == "inf") {
      c.s_max = kUnboundedSwitches;
    } else {
      s.get_to(c.s_max);
    }
  }
  return spec;
}

json PolicySpecToJson(const PolicySpec& spec) {
  const auto& c = spec.config;
  json j{{"name", spec.name},
         {"policy", PolicyName(c.policy)},
         {"delta_t", c.delta_t},
         {"delta_l_fraction", c.delta_l_fraction},
         {"b_min", c.b_min},
         {"b_max", c.b_max},
         {"delta_t_s", c.delta_t_s}};
  if (c.s_max == kUnboundedSwitches) {
    j["s_max"] = "inf";
  } else {
    j["s_max"] = c.s_max;
  }
  return j;
}

TraceSpec ParseTraceSpec(const json& j) {
  TraceSpec spec;
  j.at("id").get_to(spec.id);
  spec.source = ParseSource(j.at("source").get<std::string>());
  ReadOptional(j, "path", spec.path);
  switch (spec.source) {
    case TraceSource::kWifiGen:
      ReadOptional(j, "mean_kbps", spec.wifi.mean_kbps);
      ReadOptional(j, "amplitude_kbps", spec.wifi.amplitude_kbps);
      ReadOptional(j, "period_s", spec.wifi.period_s);
      ReadOptional(j, "duration_s", spec.wifi.duration_s);
      break;
    case TraceSource::kHspaGen:
      ReadOptional(j, "mean_kbps", spec.hspa.mean_kbps);
      ReadOptional(j, "outage_rate", spec.hspa.outage_rate);
      ReadOptional(j, "duration_s", spec.hspa.duration_s);
      break;
    case TraceSource::kFile:
      break;
  }
  if (j.contains("latency")) spec.latency = j.at("latency").get<double>();
  ReadOptional(j, "overhead_factor", spec.overhead_factor);
  j.at("target_averages").get_to(spec.target_averages);
  return spec;
}

json TraceSpecToJson(const TraceSpec& spec) {
  json j{{"id", spec.id}, {"source", SourceName(spec.source)}};
  switch (spec.source) {
    case TraceSource::kFile:
      j["path"] = spec.path;
      break;
    case TraceSource::kWifiGen:
      j["mean_kbps"] = spec.wifi.mean_kbps;
      j["amplitude_kbps"] = spec.wifi.amplitude_kbps;
      j["period_s"] = spec.wifi.period_s;
      j["duration_s"] = spec.wifi.duration_s;
      break;
    case TraceSource::kHspaGen:
      j["mean_kbps"] = spec.hspa.mean_kbps;
      j["outage_rate"] = spec.hspa.outage_rate;
      j["duration_s"] = spec.hspa.duration_s;
      break;
  }
  if (spec.latency) j["latency"] = *spec.latency;
  j["overhead_factor"] = spec.overhead_factor;
  j["target_averages"] = spec.target_averages;
  return j;
}

VideoSpec ParseVideoSpec(const json& j) {
  VideoSpec spec;
  j.at("id").get_to(spec.id);
  ReadOptional(j, "segment_duration_s", spec.params.segment_duration_s);
  ReadOptional(j, "total_duration_s", spec.params.total_duration_s);
  ReadOptional(j, "vbr_spread", spec.params.vbr_spread);
  ReadOptional(j, "seed", spec.params.seed);
  ReadOptional(j, "sizes_file", spec.sizes_file);
  return spec;
}

json VideoSpecToJson(const VideoSpec& spec) {
  json j{{"id", spec.id},
         {"segment_duration_s", spec.params.segment_duration_s},
         {"total_duration_s", spec.params.total_duration_s},
         {"vbr_spread", spec.params.vbr_spread},
         {"seed", spec.params.seed}};
  if (!spec.sizes_file.empty()) j["sizes_file"] = spec.sizes_file;
  return j;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  out.close();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string Sanitize(std::string text) {
  for (char& c : text) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '-' || c == '.';
    if (!keep) c = '_';
  }
  return text;
}

}  // namespace

std::vector<PolicySpec> StandardPolicies() {
  return {{"bandwidth", AbrConfig::BandwidthEstimation()},
          {"buffer", AbrConfig::BufferReactive()},
          {"hybrid-base", AbrConfig::HybridBase()},
          {"hybrid-adaptive", AbrConfig::HybridAdaptive()}};
}

void ExperimentPlan::Validate() const {
  if (policies.empty()) throw InvalidArgument("plan has no policies");
  if (traces.empty()) throw InvalidArgument("plan has no traces");
  if (videos.empty()) throw InvalidArgument("plan has no videos");
  if (seeds.empty()) throw InvalidArgument("plan has no seeds");
  for (const auto& p : policies) {
    if (p.name.empty()) throw InvalidArgument("policy without a name");
    p.config.Validate();
  }
  for (const auto& t : traces) {
    if (t.id.empty()) throw InvalidArgument("trace without an id");
    if (t.target_averages.empty()) {
      throw InvalidArgument(fmt::format("trace '{}' has no target averages",
                                        t.id));
    }
    for (double a : t.target_averages) {
      if (!(a > 0.0)) throw InvalidArgument("target averages must be positive");
    }
    if (t.source == TraceSource::kFile && t.path.empty()) {
      throw InvalidArgument(fmt::format("file trace '{}' needs a path", t.id));
    }
  }
  for (const auto& v : videos) {
    if (v.id.empty()) throw InvalidArgument("video without an id");
  }
}

ExperimentPlan ParsePlan(const std::string& json_text) {
  ExperimentPlan plan;
  try {
    const json j = json::parse(json_text);
    for (const auto& p : j.at("policies")) plan.policies.push_back(ParsePolicySpec(p));
    for (const auto& t : j.at("traces")) plan.traces.push_back(ParseTraceSpec(t));
    for (const auto& v : j.at("videos")) plan.videos.push_back(ParseVideoSpec(v));
    j.at("seeds").get_to(plan.seeds);
    ReadOptional(j, "output_dir", plan.output_dir);
    if (j.contains("session")) {
      const auto& s = j.at("session");
      if (s.contains("startup_threshold")) {
        plan.session.startup_threshold = s.at("startup_threshold").get<double>();
      }
      if (s.contains("rebuffer_threshold")) {
        plan.session.rebuffer_threshold =
            s.at("rebuffer_threshold").get<double>();
      }
      if (s.contains("buffer_capacity")) {
        plan.session.buffer_capacity = s.at("buffer_capacity").get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed plan: ") + e.what());
  }
  plan.Validate();
  return plan;
}

ExperimentPlan LoadPlan(const std::string& path) {
  return ParsePlan(ReadFile(path));
}

std::string PlanToJson(const ExperimentPlan& plan) {
  json j;
  j["policies"] = json::array();
  for (const auto& p : plan.policies) j["policies"].push_back(PolicySpecToJson(p));
  j["traces"] = json::array();
  for (const auto& t : plan.traces) j["traces"].push_back(TraceSpecToJson(t));
  j["videos"] = json::array();
  for (const auto& v : plan.videos) j["videos"].push_back(VideoSpecToJson(v));
  j["seeds"] = plan.seeds;
  j["output_dir"] = plan.output_dir;
  json session = json::object();
  if (plan.session.startup_threshold) {
    session["startup_threshold"] = *plan.session.startup_threshold;
  }
  if (plan.session.rebuffer_threshold) {
    session["rebuffer_threshold"] = *plan.session.rebuffer_threshold;
  }
  if (plan.session.buffer_capacity) {
    session["buffer_capacity"] = *plan.session.buffer_capacity;
  }
  j["session"] = session;
  return j.dump(2) + "\n";
}

bool RowLess(const ResultRow& a, const ResultRow& b) {
  return std::tie(a.policy, a.trace_id, a.target_avg_kbps, a.video_id,
                  a.seed) <
         std::tie(b.policy, b.trace_id, b.target_avg_kbps, b.video_id, b.seed);
}

BandwidthTrace BuildTrace(const TraceSpec& spec, std::uint64_t seed,
                          double target_average) {
  BandwidthTrace base = [&] {
    switch (spec.source) {
      case TraceSource::kWifiGen: {
        WifiTraceParams params = spec.wifi;
        params.seed = seed;
        return GenerateWifiTrace(params);
      }
      case TraceSource::kHspaGen: {
        HspaTraceParams params = spec.hspa;
        params.seed = seed;
        return GenerateHspaTrace(params);
      }
      case TraceSource::kFile:
        break;
    }
    return LoadTrace(spec.path, spec.latency.value_or(0.0),
                     spec.overhead_factor);
  }();
  base = base.WithOverhead(spec.overhead_factor);
  if (spec.latency) base = base.WithLatency(*spec.latency);
  return RescaleTrace(base, target_average);
}

VideoModel MakeVideo(const VideoSpec& spec) {
  const BitrateLadder ladder = BitrateLadder::Standard();
  if (!spec.sizes_file.empty()) {
    return LoadVideoSizes(spec.sizes_file, ladder,
                          spec.params.segment_duration_s);
  }
  return BuildVideo(ladder, spec.params);
}

SessionOptions ResolveSessionOptions(const SessionOverrides& overrides,
                                     const AbrConfig& config,
                                     const VideoModel& video) {
  SessionOptions options = SessionOptions::Defaults(config, video);
  if (overrides.startup_threshold) {
    options.startup_threshold = *overrides.startup_threshold;
  }
  if (overrides.rebuffer_threshold) {
    options.rebuffer_threshold = *overrides.rebuffer_threshold;
  }
  if (overrides.buffer_capacity) {
    options.buffer_capacity = *overrides.buffer_capacity;
  }
  return options;
}

std::string SessionFileStem(const ResultRow& row) {
  return Sanitize(fmt::format("{}__{}__{}__{}__{}", row.policy, row.trace_id,
                              row.target_avg_kbps, row.video_id, row.seed));
}

std::vector<ResultRow> RunMatrix(const ExperimentPlan& plan,
                                 const MatrixOptions& options) {
  plan.Validate();

  const bool write = !plan.output_dir.empty();
  const fs::path out_dir(plan.output_dir);
  const fs::path session_dir = out_dir / "sessions";
  if (write) {
    std::error_code ec;
    fs::create_directories(options.write_session_files ? session_dir : out_dir,
                           ec);
    if (ec) {
      throw std::runtime_error(fmt::format("cannot create output directory {}: {}",
                                           plan.output_dir, ec.message()));
    }
  }

  // Videos and traces are immutable and shared read-only across workers.
  std::vector<VideoModel> videos;
  for (const auto& v : plan.videos) videos.push_back(MakeVideo(v));
  std::map<std::tuple<std::size_t, std::uint64_t, double>, BandwidthTrace> traces;
  for (std::size_t t = 0; t < plan.traces.size(); ++t) {
    for (std::uint64_t seed : plan.seeds) {
      for (double target : plan.traces[t].target_averages) {
        traces.emplace(std::make_tuple(t, seed, target),
                       BuildTrace(plan.traces[t], seed, target));
      }
    }
  }

  struct Job {
    std::size_t policy;
    std::size_t trace;
    double target;
    std::size_t video;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < plan.policies.size(); ++p) {
    for (std::size_t t = 0; t < plan.traces.size(); ++t) {
      for (double target : plan.traces[t].target_averages) {
        for (std::size_t v = 0; v < plan.videos.size(); ++v) {
          for (std::uint64_t seed : plan.seeds) {
            jobs.push_back({p, t, target, v, seed});
          }
        }
      }
    }
  }

  std::vector<ResultRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        const Job& job = jobs[k];
        const auto& policy = plan.policies[job.policy];
        const auto& video = videos[job.video];
        const auto& trace =
            traces.at(std::make_tuple(job.trace, job.seed, job.target));
        const SessionOptions session_options =
            ResolveSessionOptions(plan.session, policy.config, video);
        const SessionLog log =
            RunSession(video, trace, policy.config, session_options);

        ResultRow& row = rows[k];
        row.policy = policy.name;
        row.trace_id = plan.traces[job.trace].id;
        row.target_avg_kbps = job.target;
        row.video_id = plan.videos[job.video].id;
        row.seed = job.seed;
        row.complete = log.complete;
        if (log.complete) {
          const QoeReport report = ComputeQoe(log, trace, video.ladder());
          row.st = report.st;
          row.re = report.re;
          row.te = report.te;
          row.sn = report.sn;
        }
        if (write && options.write_session_files) {
          const fs::path stem = session_dir / SessionFileStem(row);
          WriteFile(stem.string() + ".json", SessionLogToJson(log));
          WriteFile(stem.string() + ".chunks.csv", ChunkPlaybacksToCsv(log));
          WriteFile(stem.string() + ".timeseries.csv",
                    TimeseriesToCsv(log, trace));
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const int workers = std::clamp(options.jobs, 1, 256);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  std::sort(rows.begin(), rows.end(), RowLess);
  if (write) WriteFile(out_dir / "results.csv", ResultsToCsv(rows));
  return rows;
}

std::string ResultsToCsv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    if (r.complete) {
      out += fmt::format("{},{},{},{},{},{},{},{},{},1\n", r.policy, r.trace_id,
                         r.target_avg_kbps, r.video_id, r.seed, r.st, r.re,
                         r.te, r.sn);
    } else {
      out += fmt::format("{},{},{},{},{},,,,,0\n", r.policy, r.trace_id,
                         r.target_avg_kbps, r.video_id, r.seed);
    }
  }
  return out;
}

std::vector<ResultRow> ParseResultsCsv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t row_number = 0;
  if (!std::getline(in, line)) throw ParseError("empty results file", 0);
  ++row_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) {
    throw ParseError("row 1: unexpected results header", row_number);
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream cells(line);
    while (std::getline(cells, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 10) {
      throw ParseError(fmt::format("row {}: expected 10 fields", row_number),
                       row_number);
    }
    try {
      ResultRow r;
      r.policy = fields[0];
      r.trace_id = fields[1];
      r.target_avg_kbps = std::stod(fields[2]);
      r.video_id = fields[3];
      r.seed = std::stoull(fields[4]);
      r.complete = fields[9] == "1";
      if (r.complete) {
        r.st = std::stod(fields[5]);
        r.re = std::stoi(fields[6]);
        r.te = std::stod(fields[7]);
        r.sn = std::stoi(fields[8]);
      }
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError(fmt::format("row {}: malformed number", row_number),
                       row_number);
    }
  }
  return rows;
}

MetricSummary SummarizeValues(std::vector<double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.n = static_cast<int>(values.size());
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

std::vector<SummaryRow> Summarize(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, std::string, double>;
  struct Columns {
    std::vector<double> st, re, te, sn;
  };
  std::map<Key, Columns> groups;
  for (const auto& r : rows) {
    if (!r.complete) continue;
    auto& g = groups[Key{r.policy, r.trace_id, r.target_avg_kbps}];
    g.st.push_back(r.st);
    g.re.push_back(r.re);
    g.te.push_back(r.te);
    g.sn.push_back(r.sn);
  }
  std::vector<SummaryRow> out;
  for (auto& [key, g] : groups) {
    SummaryRow row;
    std::tie(row.policy, row.trace_id, row.target_avg_kbps) = key;
    row.st = SummarizeValues(std::move(g.st));
    row.re = SummarizeValues(std::move(g.re));
    row.te = SummarizeValues(std::move(g.te));
    row.sn = SummarizeValues(std::move(g.sn));
    out.push_back(std::move(row));
  }
  return out;
}

std::string SummaryToCsv(const std::vector<SummaryRow>& rows) {
  std::string out =
      "policy,trace_id,target_avg_kbps,metric,n,min,q1,median,q3,max,mean\n";
  for (const auto& r : rows) {
    const std::pair<const char*, const MetricSummary*> metrics[] = {
        {"st_s", &r.st}, {"re", &r.re}, {"te", &r.te}, {"sn", &r.sn}};
    for (const auto& [name, m] : metrics) {
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.policy,
                         r.trace_id, r.target_avg_kbps, name, m->n, m->min,
                         m->q1, m->median, m->q3, m->max, m->mean);
    }
  }
  return out;
}

}  // namespace abrsim
