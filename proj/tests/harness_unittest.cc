#include "abrsim/harness.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

namespace abrsim {
namespace {

namespace fs = std::filesystem;

ExperimentPlan SmallPlan() {
  return ParsePlan(R"({
    "policies": ["bandwidth", "buffer", "hybrid-base",
                 {"name": "adaptive-tight", "policy": "hybrid-adaptive",
                  "s_max": 3, "delta_t_s": 12}],
    "traces": [
      {"id": "wifi", "source": "wifi-gen", "duration_s": 100,
       "target_averages": [1000, 1500, 2600]},
      {"id": "hspa", "source": "hspa-gen", "duration_s": 100,
       "outage_rate": 0.02, "latency": 0.12, "target_averages": [1000]}
    ],
    "videos": [
      {"id": "a", "total_duration_s": 40, "vbr_spread": 0.2, "seed": 1},
      {"id": "b", "total_duration_s": 40, "vbr_spread": 0.2, "seed": 2}
    ],
    "seeds": [1, 2],
    "session": {"buffer_capacity": 20}
  })");
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("abrsim_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

TEST(PlanTest, ParsesPoliciesAndOverrides) {
  const auto plan = SmallPlan();
  ASSERT_EQ(plan.policies.size(), 4u);
  EXPECT_EQ(plan.policies[0].config, AbrConfig::BandwidthEstimation());
  EXPECT_EQ(plan.policies[3].name, "adaptive-tight");
  EXPECT_EQ(plan.policies[3].config.policy, Policy::kHybridAdaptive);
  EXPECT_EQ(plan.policies[3].config.s_max, 3);
  EXPECT_EQ(plan.policies[3].config.delta_t_s, 12.0);
  EXPECT_EQ(plan.policies[3].config.b_max, 7.0);
  EXPECT_EQ(plan.traces[1].source, TraceSource::kHspaGen);
  EXPECT_EQ(plan.traces[1].latency, 0.12);
  EXPECT_EQ(plan.session.buffer_capacity, 20.0);
  EXPECT_FALSE(plan.session.startup_threshold.has_value());
}

TEST(PlanTest, RoundTripsThroughJson) {
  const auto plan = SmallPlan();
  EXPECT_EQ(ParsePlan(PlanToJson(plan)), plan);
}

TEST(PlanTest, UnboundedSwitchLimit) {
  const auto plan = ParsePlan(R"({
    "policies": [{"name": "x", "policy": "hybrid-adaptive", "s_max": "inf"}],
    "traces": [{"id": "t", "source": "wifi-gen", "target_averages": [1000]}],
    "videos": [{"id": "v"}], "seeds": [1]})");
  EXPECT_EQ(plan.policies[0].config.s_max, kUnboundedSwitches);
  EXPECT_EQ(ParsePlan(PlanToJson(plan)), plan);
}

TEST(PlanTest, EmptyListsAreRejected) {
  EXPECT_THROW(ParsePlan(R"({
    "policies": [],
    "traces": [{"id": "t", "source": "wifi-gen", "target_averages": [1000]}],
    "videos": [{"id": "v"}], "seeds": [1]})"),
               InvalidArgument);
  EXPECT_THROW(ParsePlan(R"({
    "policies": ["bandwidth"],
    "traces": [{"id": "t", "source": "wifi-gen", "target_averages": []}],
    "videos": [{"id": "v"}], "seeds": [1]})"),
               InvalidArgument);
  EXPECT_THROW(ParsePlan(R"({
    "policies": ["bandwidth"],
    "traces": [{"id": "t", "source": "wifi-gen", "target_averages": [1]}],
    "videos": [{"id": "v"}], "seeds": []})"),
               InvalidArgument);
}

TEST(PlanTest, MalformedDocumentsAreRejected) {
  EXPECT_THROW(ParsePlan("{"), InvalidArgument);
  EXPECT_THROW(ParsePlan(R"({
    "policies": ["bola"],
    "traces": [{"id": "t", "source": "wifi-gen", "target_averages": [1]}],
    "videos": [{"id": "v"}], "seeds": [1]})"),
               InvalidArgument);
  EXPECT_THROW(ParsePlan(R"({
    "policies": ["bandwidth"],
    "traces": [{"id": "t", "source": "lte", "target_averages": [1]}],
    "videos": [{"id": "v"}], "seeds": [1]})"),
               InvalidArgument);
}

TEST(BuildTraceTest, RescalesToTargetAndAppliesOverrides) {
  const auto plan = SmallPlan();
  const auto wifi = BuildTrace(plan.traces[0], 1, 1500.0);
  EXPECT_NEAR(TimeAverage(wifi), 1500.0, 1e-9 * 1500.0);
  EXPECT_EQ(wifi.latency(), kWifiLatencySeconds);
  const auto hspa = BuildTrace(plan.traces[1], 2, 1000.0);
  EXPECT_NEAR(TimeAverage(hspa), 1000.0, 1e-9 * 1000.0);
  EXPECT_EQ(hspa.latency(), 0.12);
  EXPECT_NE(BuildTrace(plan.traces[1], 1, 1000.0), hspa);
}

TEST(BuildTraceTest, LoadsFileTraces) {
  const fs::path dir = TempDir("filetrace");
  fs::create_directories(dir);
  const fs::path path = dir / "t.csv";
  std::ofstream(path) << "time_s,throughput_kbps\n0,1000\n5,3000\n10,3000\n";
  TraceSpec spec;
  spec.id = "f";
  spec.source = TraceSource::kFile;
  spec.path = path.string();
  spec.target_averages = {1000.0};
  const auto trace = BuildTrace(spec, 1, 1000.0);
  EXPECT_EQ(trace.duration(), 10.0);
  EXPECT_DOUBLE_EQ(trace.ThroughputAt(1.0), 500.0);
  EXPECT_EQ(trace.latency(), 0.0);
  fs::remove_all(dir);
}

TEST(RunMatrixTest, CardinalityOfStandardShape) {
  ExperimentPlan plan;
  plan.policies = StandardPolicies();
  TraceSpec trace;
  trace.id = "wifi";
  trace.wifi.duration_s = 60.0;
  trace.target_averages = {1000.0, 1500.0, 2600.0};
  plan.traces = {trace};
  for (int v = 1; v <= 6; ++v) {
    plan.videos.push_back(
        {"clip" + std::to_string(v), {2.0, 20.0, 0.2, static_cast<std::uint64_t>(v)}, ""});
  }
  plan.seeds = {1};
  const auto rows = RunMatrix(plan);
  EXPECT_EQ(rows.size(), 72u);
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end(), RowLess));
}

TEST(RunMatrixTest, ParallelRunsMatchSerialRuns) {
  const auto plan = SmallPlan();
  const auto serial = RunMatrix(plan, {1, false});
  const auto parallel = RunMatrix(plan, {8, false});
  EXPECT_EQ(serial.size(), 4u * 4u * 2u * 2u);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(ResultsToCsv(serial), ResultsToCsv(parallel));
}

TEST(RunMatrixTest, WritesOutputsAndMetricsAreRederivable) {
  auto plan = SmallPlan();
  const fs::path dir = TempDir("matrix");
  plan.output_dir = dir.string();
  const auto rows = RunMatrix(plan, {4, true});
  const std::string csv = Slurp(dir / "results.csv");
  EXPECT_EQ(csv, ResultsToCsv(rows));
  EXPECT_EQ(ParseResultsCsv(csv), rows);

  const auto videos = std::vector<VideoModel>{MakeVideo(plan.videos[0]),
                                              MakeVideo(plan.videos[1])};
  for (const auto& row : rows) {
    const fs::path stem = dir / "sessions" / SessionFileStem(row);
    ASSERT_TRUE(fs::exists(stem.string() + ".chunks.csv"));
    ASSERT_TRUE(fs::exists(stem.string() + ".timeseries.csv"));
    const SessionLog log = SessionLogFromJson(Slurp(stem.string() + ".json"));
    const auto& spec = row.trace_id == "wifi" ? plan.traces[0] : plan.traces[1];
    const auto trace = BuildTrace(spec, row.seed, row.target_avg_kbps);
    const auto& video = row.video_id == "a" ? videos[0] : videos[1];
    const auto qoe = ComputeQoe(log, trace, video.ladder());
    EXPECT_EQ(qoe.st, row.st);
    EXPECT_EQ(qoe.re, row.re);
    EXPECT_EQ(qoe.te, row.te);
    EXPECT_EQ(qoe.sn, row.sn);
  }
  fs::remove_all(dir);
}

TEST(RunMatrixTest, AbortedSessionIsFlaggedAndRunContinues) {
  const fs::path dir = TempDir("abort");
  fs::create_directories(dir);
  const fs::path path = dir / "dead.csv";
  std::ofstream(path) << "time_s,throughput_kbps\n0,3000\n4,0\n60,0\n";
  auto plan = SmallPlan();
  TraceSpec dead;
  dead.id = "dead";
  dead.source = TraceSource::kFile;
  dead.path = path.string();
  dead.target_averages = {200.0};
  plan.traces.push_back(dead);
  const auto rows = RunMatrix(plan, {2, false});
  int aborted = 0;
  for (const auto& r : rows) {
    if (r.trace_id == "dead") {
      EXPECT_FALSE(r.complete);
      ++aborted;
    } else {
      EXPECT_TRUE(r.complete);
    }
  }
  EXPECT_EQ(aborted, 4 * 2 * 2);
  const auto csv = ResultsToCsv(rows);
  EXPECT_NE(csv.find(",,,,,0\n"), std::string::npos);
  EXPECT_EQ(ParseResultsCsv(csv), rows);
  for (const auto& s : Summarize(rows)) EXPECT_NE(s.trace_id, "dead");
  fs::remove_all(dir);
}

TEST(RunMatrixTest, UnwritableOutputFails) {
  auto plan = SmallPlan();
  const fs::path dir = TempDir("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  plan.output_dir = (dir / "file" / "out").string();
  EXPECT_THROW(RunMatrix(plan), std::runtime_error);
  fs::remove_all(dir);
}

TEST(SummarizeTest, SingleValue) {
  const auto s = SummarizeValues({4.5});
  EXPECT_EQ(s, (MetricSummary{1, 4.5, 4.5, 4.5, 4.5, 4.5, 4.5}));
}

TEST(SummarizeTest, OneToFive) {
  const auto s = SummarizeValues({5, 3, 1, 4, 2});
  EXPECT_EQ(s.median, 3.0);
  EXPECT_EQ(s.mean, 3.0);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 5.0);
  EXPECT_EQ(s.q1, 2.0);
  EXPECT_EQ(s.q3, 4.0);
}

TEST(SummarizeTest, InterpolatesBetweenRanks) {
  const auto s = SummarizeValues({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.q3, 3.25);
}

TEST(SummarizeTest, SingleRowTable) {
  ResultRow row{"bandwidth", "wifi", 2600.0, "a", 1, 1.5, 2, 0.75, 9, true};
  const auto summary = Summarize({row});
  ASSERT_EQ(summary.size(), 1u);
  EXPECT_EQ(summary[0].st.min, 1.5);
  EXPECT_EQ(summary[0].st.max, 1.5);
  EXPECT_EQ(summary[0].re.median, 2.0);
  EXPECT_EQ(summary[0].te.mean, 0.75);
  EXPECT_EQ(summary[0].sn.q3, 9.0);
}

TEST(SummarizeTest, IndependentOfRowOrder) {
  auto rows = RunMatrix(SmallPlan(), {4, false});
  const auto expected = SummaryToCsv(Summarize(rows));
  std::mt19937_64 rng(5);
  for (int n = 0; n < 20; ++n) {
    std::shuffle(rows.begin(), rows.end(), rng);
    EXPECT_EQ(SummaryToCsv(Summarize(rows)), expected);
  }
}

TEST(ResultsCsvTest, RejectsMalformedRows) {
  EXPECT_THROW(ParseResultsCsv("nope\n"), ParseError);
  EXPECT_THROW(
      ParseResultsCsv("policy,trace_id,target_avg_kbps,video_id,seed,st_s,re,"
                      "te,sn,complete\nbandwidth,wifi,x,a,1,0,0,1,0,1\n"),
      ParseError);
}

}  // namespace
}  // namespace abrsim
