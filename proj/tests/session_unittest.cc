#include "abrsim/session.h"

#include <gtest/gtest.h>

#include <random>

#include "abrsim/metrics.h"
#include "session_checks.h"
#include "test_oracles.h"

namespace abrsim {
namespace {

using testing::ConstantTrace;

const AbrConfig kAllPolicies[] = {
    AbrConfig::BandwidthEstimation(), AbrConfig::BufferReactive(),
    AbrConfig::HybridBase(), AbrConfig::HybridAdaptive()};

VideoModel Video(double total, double vbr = 0.0, std::uint64_t seed = 1) {
  return BuildVideo(BitrateLadder::Standard(), {2.0, total, vbr, seed});
}

void ExpectSound(const SessionLog& log, const VideoModel& video,
                 const SessionOptions& options) {
  for (const auto& v : testing::SessionViolations(log, video, options)) {
    ADD_FAILURE() << v;
  }
}

TEST(RunSessionTest, FastLinkReachesTopAndNeverStalls) {
  const auto video = Video(600.0);
  const auto trace = ConstantTrace(10000.0, 660.0, 0.02, 0.05);
  for (const auto& config : kAllPolicies) {
    const auto options = SessionOptions::Defaults(config, video);
    const auto log = RunSession(video, trace, config, options);
    SCOPED_TRACE(std::string(PolicyName(config.policy)));
    ExpectSound(log, video, options);
    EXPECT_EQ(StallingTime(log), 0.0);
    EXPECT_EQ(RebufferCount(log), 0);
    EXPECT_EQ(log.chunk_playbacks.back().level, 4);
    // Once the top level is reached it is held.
    auto first_top = std::find_if(
        log.chunk_playbacks.begin(), log.chunk_playbacks.end(),
        [](const ChunkPlayback& c) { return c.level == 4; });
    ASSERT_NE(first_top, log.chunk_playbacks.end());
    for (auto it = first_top; it != log.chunk_playbacks.end(); ++it) {
      EXPECT_EQ(it->level, 4);
    }
  }
}

TEST(RunSessionTest, StarvedLinkStallsAtLowestLevel) {
  const auto video = Video(60.0);
  const auto trace = ConstantTrace(100.0, 660.0, 0.02, 0.05);
  for (const auto& config : kAllPolicies) {
    const auto options = SessionOptions::Defaults(config, video);
    const auto log = RunSession(video, trace, config, options);
    SCOPED_TRACE(std::string(PolicyName(config.policy)));
    ExpectSound(log, video, options);
    EXPECT_GE(log.stalls.size(), 1u);
    EXPECT_GT(StallingTime(log), 0.0);
    for (const auto& d : log.decisions) EXPECT_EQ(d.new_q, 0);
    for (const auto& c : log.chunk_playbacks) EXPECT_EQ(c.level, 0);
  }
}

TEST(RunSessionTest, SingleSegment) {
  const auto video = Video(2.0);
  const auto trace = ConstantTrace(2600.0, 60.0, 0.02, 0.05);
  const auto config = AbrConfig::HybridBase();
  const auto options = SessionOptions::Defaults(config, video);
  const auto log = RunSession(video, trace, config, options);
  ExpectSound(log, video, options);
  ASSERT_EQ(log.chunk_playbacks.size(), 1u);
  EXPECT_TRUE(log.decisions.empty());
  EXPECT_DOUBLE_EQ(log.initial_buffering, log.downloads[0].completion_time);
}

TEST(RunSessionTest, PlaybackStartsAtStartupThreshold) {
  const auto video = Video(60.0);
  const auto trace = ConstantTrace(2600.0, 100.0, 0.02, 0.0);
  const auto config = AbrConfig::BufferReactive();
  const auto options = SessionOptions::Defaults(config, video);
  const auto log = RunSession(video, trace, config, options);
  // Two 2 s segments are needed to cover the 3 s threshold.
  EXPECT_DOUBLE_EQ(log.initial_buffering, log.downloads[1].completion_time);
}

TEST(RunSessionTest, DownloadsPauseAtCapacity) {
  const auto video = Video(120.0);
  const auto trace = ConstantTrace(20000.0, 200.0, 0.02, 0.05);
  const auto config = AbrConfig::BandwidthEstimation();
  SessionOptions options = SessionOptions::Defaults(config, video);
  options.buffer_capacity = 10.0;
  const auto log = RunSession(video, trace, config, options);
  ExpectSound(log, video, options);
  double max_level = 0.0;
  for (const auto& p : log.timeline) max_level = std::max(max_level, p.buffer_level);
  EXPECT_LE(max_level, 10.0 + 1e-9);
  EXPECT_GT(max_level, 8.0);
}

TEST(RunSessionTest, CapacityChangesRequestTimes) {
  const auto video = Video(120.0, 0.2, 3);
  const auto trace = GenerateHspaTrace({1500.0, 200.0, 0.02, 5});
  const auto config = AbrConfig::BandwidthEstimation();
  SessionOptions small = SessionOptions::Defaults(config, video);
  small.buffer_capacity = 8.0;
  const SessionOptions large = SessionOptions::Defaults(config, video);
  EXPECT_NE(RunSession(video, trace, config, small),
            RunSession(video, trace, config, large));
}

TEST(RunSessionTest, ReplayIsDeterministic) {
  const auto video = Video(120.0, 0.2, 3);
  const auto trace = GenerateHspaTrace({1000.0, 200.0, 0.02, 8});
  for (const auto& config : kAllPolicies) {
    const auto options = SessionOptions::Defaults(config, video);
    const auto log = RunSession(video, trace, config, options);
    EXPECT_TRUE(ReplayCheck(log, video, trace, config, options));
  }
}

TEST(RunSessionTest, DifferentVideoSeedChangesLog) {
  const auto trace = GenerateHspaTrace({1000.0, 200.0, 0.02, 8});
  const auto config = AbrConfig::BandwidthEstimation();
  const auto a = Video(120.0, 0.2, 3);
  const auto b = Video(120.0, 0.2, 4);
  EXPECT_NE(RunSession(a, trace, config, SessionOptions::Defaults(config, a)),
            RunSession(b, trace, config, SessionOptions::Defaults(config, b)));
}

TEST(RunSessionTest, TrailingOutageAbortsIncomplete) {
  const auto video = Video(60.0);
  const BandwidthTrace trace({{0.0, 2600.0}, {5.0, 0.0}}, 60.0, 0.02, 0.05);
  const auto config = AbrConfig::BandwidthEstimation();
  const auto log =
      RunSession(video, trace, config, SessionOptions::Defaults(config, video));
  EXPECT_FALSE(log.complete);
  EXPECT_FALSE(log.abort_reason.empty());
  EXPECT_THROW(StallingTime(log), InvalidArgument);
  EXPECT_THROW(RebufferCount(log), InvalidArgument);
}

TEST(RunSessionTest, RejectsInconsistentOptions) {
  const auto video = Video(60.0);
  const auto trace = ConstantTrace(2600.0, 60.0, 0.02, 0.05);
  const auto config = AbrConfig::BandwidthEstimation();
  SessionOptions o = SessionOptions::Defaults(config, video);
  o.startup_threshold = 1.0;
  EXPECT_THROW(RunSession(video, trace, config, o), InvalidArgument);
  o = SessionOptions::Defaults(config, video);
  o.rebuffer_threshold = 0.0;
  EXPECT_THROW(RunSession(video, trace, config, o), InvalidArgument);
  o = SessionOptions::Defaults(config, video);
  o.buffer_capacity = 4.0;
  EXPECT_THROW(RunSession(video, trace, config, o), InvalidArgument);
}

TEST(RunSessionTest, InvariantsHoldOnRandomInputs) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> segments(1, 40);
  std::uniform_int_distribution<int> policy(0, 3);
  std::uniform_real_distribution<double> spread(0.0, 0.4);
  std::uniform_real_distribution<double> cap(12.0, 40.0);
  for (int n = 0; n < 1000; ++n) {
    const auto video = Video(2.0 * segments(rng), spread(rng), rng());
    const auto trace = testing::RandomTrace(rng, true);
    const auto& config = kAllPolicies[policy(rng)];
    SessionOptions options = SessionOptions::Defaults(config, video);
    options.buffer_capacity = cap(rng);
    const auto log = RunSession(video, trace, config, options);
    ASSERT_TRUE(log.complete) << log.abort_reason;
    const auto bad = testing::SessionViolations(log, video, options);
    ASSERT_TRUE(bad.empty()) << "case " << n << ": " << bad.front();
  }
}

TEST(SessionIoTest, JsonRoundTrip) {
  const auto video = Video(60.0, 0.2, 2);
  const auto trace = GenerateHspaTrace({1000.0, 100.0, 0.05, 4});
  const auto config = AbrConfig::HybridAdaptive();
  const auto log =
      RunSession(video, trace, config, SessionOptions::Defaults(config, video));
  EXPECT_EQ(SessionLogFromJson(SessionLogToJson(log)), log);
}

TEST(SessionIoTest, ChunkCsvHasOneRowPerChunk) {
  const auto video = Video(20.0);
  const auto trace = ConstantTrace(2600.0, 60.0, 0.02, 0.05);
  const auto config = AbrConfig::BufferReactive();
  const auto log =
      RunSession(video, trace, config, SessionOptions::Defaults(config, video));
  const std::string csv = ChunkPlaybacksToCsv(log);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
  const std::string series = TimeseriesToCsv(log, trace);
  EXPECT_EQ(series.rfind("time_s,buffer_level_s,q,throughput_kbps\n", 0), 0u);
  EXPECT_EQ(std::count(series.begin(), series.end(), '\n'),
            static_cast<long>(log.timeline.size()) + 1);
}

}  // namespace
}  // namespace abrsim
