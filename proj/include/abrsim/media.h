#ifndef ABRSIM_MEDIA_H_
#define ABRSIM_MEDIA_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "abrsim/error.h"

namespace abrsim {

struct Representation {
  double bitrate_kbps = 0.0;
  std::string label;

  bool operator==(const Representation&) const = default;
};

// Quality levels ordered by bitrate; index 0 is the lowest quality.
class BitrateLadder {
 public:
  explicit BitrateLadder(std::vector<Representation> levels);

  // The five-level ladder shared by all evaluation clips: 150 kbit/s (240p)
  // up to 2.5 Mbit/s (1080p).
  static BitrateLadder Standard();

  int size() const { return static_cast<int>(levels_.size()); }
  int min_level() const { return 0; }
  int max_level() const { return size() - 1; }
  const std::vector<Representation>& levels() const { return levels_; }

  // Throws InvalidArgument for an out-of-range level.
  double BitrateOf(int level) const;

  bool operator==(const BitrateLadder&) const = default;

 private:
  std::vector<Representation> levels_;
};

struct VideoParams {
  double segment_duration_s = 2.0;
  double total_duration_s = 600.0;
  double vbr_spread = 0.0;
  std::uint64_t seed = 1;

  bool operator==(const VideoParams&) const = default;
};

class VideoModel {
 public:
  VideoModel(BitrateLadder ladder, double segment_duration,
             std::vector<std::vector<double>> sizes, double vbr_spread,
             std::uint64_t seed);

  const BitrateLadder& ladder() const { return ladder_; }
  double segment_duration() const { return segment_duration_; }
  int segment_count() const { return static_cast<int>(sizes_.size()); }
  double duration() const { return segment_duration_ * segment_count(); }
  double vbr_spread() const { return vbr_spread_; }
  std::uint64_t seed() const { return seed_; }

  // Bytes of segment `segment` encoded at `level`.
  double SizeOf(int segment, int level) const;

  bool operator==(const VideoModel&) const = default;

 private:
  BitrateLadder ladder_;
  double segment_duration_;
  std::vector<std::vector<double>> sizes_;  // [segment][level]
  double vbr_spread_;
  std::uint64_t seed_;
};

// Sizes are nominal_bitrate * segment_duration / 8 scaled by a per-segment
// factor 1 + e, e uniform in [-vbr_spread, vbr_spread] and shared by every
// level of the segment.
VideoModel BuildVideo(const BitrateLadder& ladder, const VideoParams& params);

// Nominal bitrate used by the policies; not the per-segment actual rate.
double BitrateOf(const VideoModel& video, int level);

// `segment_index,level_index,bytes` CSV pinning exact sizes.
VideoModel ParseVideoSizes(std::istream& in, const BitrateLadder& ladder,
                           double segment_duration);
VideoModel LoadVideoSizes(const std::string& path, const BitrateLadder& ladder,
                          double segment_duration);
void WriteVideoSizes(const VideoModel& video, std::ostream& out);

}  // namespace abrsim

#endif  // ABRSIM_MEDIA_H_
