#ifndef ABRSIM_SESSION_H_
#define ABRSIM_SESSION_H_

#include <string>
#include <vector>

#include "abrsim/abr.h"
#include "abrsim/media.h"
#include "abrsim/netsim.h"
#include "abrsim/trace.h"

namespace abrsim {

struct PlayerState {
  double buffer_level = 0.0;  // seconds of media buffered
  bool playing = false;
  double playhead = 0.0;  // seconds of media played
  double clock = 0.0;     // virtual wall time

  bool operator==(const PlayerState&) const = default;
};

struct Decision {
  double time = 0.0;
  int old_q = 0;
  int new_q = 0;

  bool operator==(const Decision&) const = default;
};

struct ChunkPlayback {
  int segment_index = 0;
  int level = 0;                    // q_i
  double scheduled_duration = 0.0;  // Δt_i
  double actual_duration = 0.0;     // Δt'_i, includes any preceding stall
  double start_wall_time = 0.0;     // when playback would have begun

  bool operator==(const ChunkPlayback&) const = default;
};

struct Stall {
  double start = 0.0;
  double duration = 0.0;
  int before_segment = 0;

  bool operator==(const Stall&) const = default;
};

// Player state snapshot taken after each processed event.
struct TimelinePoint {
  double time = 0.0;
  double buffer_level = 0.0;
  int q = 0;  // level selected for the next request

  bool operator==(const TimelinePoint&) const = default;
};

struct SessionLog {
  std::vector<DownloadRecord> downloads;
  // Policy consultations; old_q == new_q when the policy held the level.
  std::vector<Decision> decisions;
  std::vector<ChunkPlayback> chunk_playbacks;
  double initial_buffering = 0.0;
  std::vector<Stall> stalls;
  std::vector<TimelinePoint> timeline;
  double end_time = 0.0;
  bool complete = true;
  std::string abort_reason;

  bool operator==(const SessionLog&) const = default;
};

struct SessionOptions {
  double startup_threshold = 3.0;   // buffered seconds before first playback
  double rebuffer_threshold = 2.0;  // buffered seconds to leave a stall
  double buffer_capacity = 30.0;    // downloads pause above this

  // Startup at b_min and restart after one segment.
  static SessionOptions Defaults(const AbrConfig& config,
                                 const VideoModel& video);

  bool operator==(const SessionOptions&) const = default;
};

// Streams the whole video over virtual time. Segments are fetched one at a
// time; the policy is consulted after every completed download. A download
// that starves ends the session with `complete == false`.
SessionLog RunSession(const VideoModel& video, const BandwidthTrace& trace,
                      const AbrConfig& config, const SessionOptions& options);

// Reruns the session and reports whether the result is field-identical.
bool ReplayCheck(const SessionLog& log, const VideoModel& video,
                 const BandwidthTrace& trace, const AbrConfig& config,
                 const SessionOptions& options);

// JSON document with every SessionLog field.
std::string SessionLogToJson(const SessionLog& log);
SessionLog SessionLogFromJson(const std::string& json);

// Flat CSV of chunk playbacks.
std::string ChunkPlaybacksToCsv(const SessionLog& log);

// time,buffer_level,q,throughput_kbps rows built from the timeline.
std::string TimeseriesToCsv(const SessionLog& log, const BandwidthTrace& trace);

}  // namespace abrsim

#endif  // ABRSIM_SESSION_H_
