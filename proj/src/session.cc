#include "abrsim/session.h"

#include <deque>
#include <limits>
#include <optional>

#include <fmt/format.h>

namespace abrsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Slack for comparing buffer levels built from sums of segment durations.
constexpr double kEps = 1e-9;

void ValidateOptions(const SessionOptions& o, const VideoModel& video) {
  const double d = video.segment_duration();
  if (!(o.startup_threshold >= d - kEps)) {
    throw InvalidArgument("startup threshold must cover one segment");
  }
  if (!(o.rebuffer_threshold > 0.0)) {
    throw InvalidArgument("rebuffer threshold must be positive");
  }
  if (!(o.startup_threshold <= o.buffer_capacity - d + kEps) ||
      !(o.rebuffer_threshold <= o.buffer_capacity - d + kEps)) {
    throw InvalidArgument(
        "buffer capacity must exceed playback thresholds by one segment");
  }
}

class SessionRunner {
 public:
  SessionRunner(const VideoModel& video, const BandwidthTrace& trace,
                const AbrConfig& config, const SessionOptions& options)
      : video_(video),
        trace_(trace),
        config_(config),
        options_(options),
        segment_duration_(video.segment_duration()),
        segment_count_(video.segment_count()),
        meter_(config.delta_t) {}

  SessionLog Run() {
    abr_.q = video_.ladder().min_level();
    if (!Request(0.0)) return std::move(log_);

    while (played_ < segment_count_) {
      const double completion = inflight_ ? inflight_->completion_time : kInf;
      const double chunk_end = playing_ ? chunk_end_ : kInf;
      const double resume = paused_ ? resume_at_ : kInf;
      // Ties resolve download first, then playback.
      if (completion <= chunk_end && completion <= resume) {
        if (completion == kInf) {
          log_.complete = false;
          log_.abort_reason = "no pending event";
          break;
        }
        if (!OnDownloadComplete(completion)) return std::move(log_);
      } else if (chunk_end <= resume) {
        OnChunkEnd(chunk_end);
      } else {
        paused_ = false;
        if (!Request(resume)) return std::move(log_);
        Snapshot(resume);
      }
    }
    log_.end_time = clock_;
    return std::move(log_);
  }

 private:
  double BufferAt(double t) const {
    const double current = playing_ ? chunk_end_ - t : 0.0;
    return current + static_cast<double>(queue_.size()) * segment_duration_;
  }

  bool AllDownloaded() const { return next_segment_ >= segment_count_; }

  void Snapshot(double t) {
    log_.timeline.push_back({t, BufferAt(t), abr_.q});
  }

  // Issues the request for the next segment at the current level.
  bool Request(double t) {
    clock_ = t;
    const int segment = next_segment_;
    try {
      inflight_ = DownloadSegment(trace_, video_.SizeOf(segment, abr_.q), t,
                                  segment, abr_.q);
    } catch (const DownloadStarved& e) {
      log_.complete = false;
      log_.abort_reason = e.what();
      log_.end_time = t;
      inflight_.reset();
      return false;
    }
    ++next_segment_;
    return true;
  }

  void StartChunk(double begin, double now) {
    current_segment_ = queue_.front();
    queue_.pop_front();
    chunk_begin_ = begin;
    chunk_wait_ = now - begin;
    chunk_end_ = now + segment_duration_;
    playing_ = true;
  }

  bool OnDownloadComplete(double t) {
    clock_ = t;
    const DownloadRecord record = *inflight_;
    inflight_.reset();
    meter_.Add(record);
    log_.downloads.push_back(record);
    levels_.push_back(record.level);
    queue_.push_back(record.segment_index);

    const double buffer = BufferAt(t);
    if (!AllDownloaded()) {
      const DecisionInputs inputs{meter_.Estimate(t), buffer, t};
      const int old_q = abr_.q;
      const int new_q = Decide(abr_, inputs, config_, video_.ladder());
      log_.decisions.push_back({t, old_q, new_q});
      if (new_q != old_q) {
        abr_ = RecordSwitch(std::move(abr_), old_q, new_q, t,
                            config_.delta_t_s);
      }
    }

    if (!playing_) {
      if (!started_) {
        if (buffer >= options_.startup_threshold - kEps || AllDownloaded()) {
          started_ = true;
          log_.initial_buffering = t;
          StartChunk(t, t);
        }
      } else if (buffer >= options_.rebuffer_threshold - kEps ||
                 AllDownloaded()) {
        log_.stalls.push_back({stall_start_, t - stall_start_, queue_.front()});
        StartChunk(stall_start_, t);
      }
    }

    if (!AllDownloaded()) {
      const double level = BufferAt(t);
      if (level + segment_duration_ <= options_.buffer_capacity + kEps) {
        if (!Request(t)) return false;
      } else {
        // Playback is running here, so the buffer drains at 1 s/s.
        paused_ = true;
        resume_at_ = t + (level - (options_.buffer_capacity - segment_duration_));
      }
    }
    Snapshot(t);
    return true;
  }

  void OnChunkEnd(double t) {
    clock_ = t;
    log_.chunk_playbacks.push_back(
        {current_segment_, levels_[static_cast<std::size_t>(current_segment_)],
         segment_duration_, segment_duration_ + chunk_wait_, chunk_begin_});
    ++played_;
    playing_ = false;
    if (!queue_.empty()) {
      StartChunk(t, t);
    } else if (played_ < segment_count_) {
      stall_start_ = t;
    }
    Snapshot(t);
  }

  const VideoModel& video_;
  const BandwidthTrace& trace_;
  const AbrConfig& config_;
  const SessionOptions& options_;
  const double segment_duration_;
  const int segment_count_;

  ThroughputMeter meter_;
  AbrState abr_;
  SessionLog log_;

  double clock_ = 0.0;
  int next_segment_ = 0;
  std::optional<DownloadRecord> inflight_;
  bool paused_ = false;
  double resume_at_ = 0.0;

  std::deque<int> queue_;  // downloaded, not yet playing
  std::vector<int> levels_;
  bool started_ = false;
  bool playing_ = false;
  int current_segment_ = -1;
  double chunk_begin_ = 0.0;
  double chunk_wait_ = 0.0;  // stall preceding the current chunk
  double chunk_end_ = 0.0;
  double stall_start_ = 0.0;
  int played_ = 0;
};

}  // namespace

SessionOptions SessionOptions::Defaults(const AbrConfig& config,
                                        const VideoModel& video) {
  SessionOptions options;
  options.startup_threshold = config.b_min;
  options.rebuffer_threshold = video.segment_duration();
  options.buffer_capacity = 30.0;
  return options;
}

SessionLog RunSession(const VideoModel& video, const BandwidthTrace& trace,
                      const AbrConfig& config, const SessionOptions& options) {
  config.Validate();
  ValidateOptions(options, video);
  return SessionRunner(video, trace, config, options).Run();
}

bool ReplayCheck(const SessionLog& log, const VideoModel& video,
                 const BandwidthTrace& trace, const AbrConfig& config,
                 const SessionOptions& options) {
  return RunSession(video, trace, config, options) == log;
}

}  // namespace abrsim
