#include "abrsim/media.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "random.h"

namespace abrsim {

BitrateLadder::BitrateLadder(std::vector<Representation> levels)
    : levels_(std::move(levels)) {
  if (levels_.size() < 2) {
    throw InvalidArgument("bitrate ladder needs at least two levels");
  }
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    if (!(levels_[k].bitrate_kbps > 0.0)) {
      throw InvalidArgument("ladder bitrates must be positive");
    }
    if (k > 0 && !(levels_[k].bitrate_kbps > levels_[k - 1].bitrate_kbps)) {
      throw InvalidArgument("ladder bitrates must increase strictly");
    }
  }
}

BitrateLadder BitrateLadder::Standard() {
  return BitrateLadder({{150.0, "320x240"},
                        {300.0, "480x360"},
                        {600.0, "854x480"},
                        {1200.0, "1280x720"},
                        {2500.0, "1920x1080"}});
}

double BitrateLadder::BitrateOf(int level) const {
  if (level < 0 || level >= size()) {
    throw InvalidArgument(fmt::format("quality level {} outside ladder [0, {}]",
                                      level, max_level()));
  }
  return levels_[static_cast<std::size_t>(level)].bitrate_kbps;
}

VideoModel::VideoModel(BitrateLadder ladder, double segment_duration,
                       std::vector<std::vector<double>> sizes,
                       double vbr_spread, std::uint64_t seed)
    : ladder_(std::move(ladder)),
      segment_duration_(segment_duration),
      sizes_(std::move(sizes)),
      vbr_spread_(vbr_spread),
      seed_(seed) {
  if (!(segment_duration_ > 0.0)) {
    throw InvalidArgument("segment duration must be positive");
  }
  if (sizes_.empty()) throw InvalidArgument("video has no segments");
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    const auto& row = sizes_[i];
    if (static_cast<int>(row.size()) != ladder_.size()) {
      throw InvalidArgument(
          fmt::format("segment {} lacks sizes for every level", i));
    }
    for (std::size_t q = 0; q < row.size(); ++q) {
      if (!(row[q] > 0.0)) {
        throw InvalidArgument(fmt::format("segment {} level {} has size <= 0",
                                          i, q));
      }
      if (q > 0 && !(row[q] > row[q - 1])) {
        throw InvalidArgument(fmt::format(
            "segment {} sizes do not increase with level at {}", i, q));
      }
    }
  }
}

double VideoModel::SizeOf(int segment, int level) const {
  if (segment < 0 || segment >= segment_count()) {
    throw InvalidArgument(fmt::format("segment {} out of range", segment));
  }
  if (level < 0 || level >= ladder_.size()) {
    throw InvalidArgument(fmt::format("level {} out of range", level));
  }
  return sizes_[static_cast<std::size_t>(segment)]
               [static_cast<std::size_t>(level)];
}

VideoModel BuildVideo(const BitrateLadder& ladder, const VideoParams& p) {
  if (!(p.segment_duration_s > 0.0) ||
      !(p.total_duration_s >= p.segment_duration_s)) {
    throw InvalidArgument("need total_duration >= segment_duration > 0");
  }
  if (!(p.vbr_spread >= 0.0 && p.vbr_spread < 0.5)) {
    throw InvalidArgument("vbr_spread must lie in [0, 0.5)");
  }
  const auto count = static_cast<std::size_t>(
      std::ceil(p.total_duration_s / p.segment_duration_s - 1e-12));

  // Scene complexity factors, centred so the per-level mean stays nominal and
  // shrunk back into the spread if centring pushed one outside it.
  std::vector<double> noise(count, 0.0);
  if (p.vbr_spread > 0.0) {
    internal::Rng rng(p.seed);
    for (auto& e : noise) e = rng.Uniform(-p.vbr_spread, p.vbr_spread);
    double mean = 0.0;
    for (double e : noise) mean += e;
    mean /= static_cast<double>(count);
    double extent = 0.0;
    for (auto& e : noise) {
      e -= mean;
      extent = std::max(extent, std::abs(e));
    }
    if (extent > p.vbr_spread) {
      for (auto& e : noise) e *= p.vbr_spread / extent;
    }
  }

  std::vector<std::vector<double>> sizes(count);
  for (std::size_t i = 0; i < count; ++i) {
    sizes[i].reserve(static_cast<std::size_t>(ladder.size()));
    for (const auto& level : ladder.levels()) {
      const double nominal =
          level.bitrate_kbps * 1000.0 * p.segment_duration_s / 8.0;
      sizes[i].push_back(nominal * (1.0 + noise[i]));
    }
  }
  return VideoModel(ladder, p.segment_duration_s, std::move(sizes),
                    p.vbr_spread, p.seed);
}

double BitrateOf(const VideoModel& video, int level) {
  return video.ladder().BitrateOf(level);
}

VideoModel ParseVideoSizes(std::istream& in, const BitrateLadder& ladder,
                           double segment_duration) {
  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw ParseError("empty video sizes file", 0);
  ++row;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "segment_index,level_index,bytes") {
    throw ParseError("row 1: expected header segment_index,level_index,bytes",
                     row);
  }
  std::vector<std::vector<double>> sizes;
  const auto levels = static_cast<std::size_t>(ladder.size());
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    long long segment = -1;
    long long level = -1;
    double bytes = 0.0;
    char c1 = 0;
    char c2 = 0;
    if (!(fields >> segment >> c1 >> level >> c2 >> bytes) || c1 != ',' ||
        c2 != ',' || segment < 0 || level < 0 ||
        static_cast<std::size_t>(level) >= levels || !(bytes > 0.0)) {
      throw ParseError(fmt::format("row {}: malformed size entry", row), row);
    }
    const auto s = static_cast<std::size_t>(segment);
    if (s >= sizes.size()) sizes.resize(s + 1, std::vector<double>(levels, 0.0));
    sizes[s][static_cast<std::size_t>(level)] = bytes;
  }
  double spread = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    for (std::size_t q = 0; q < levels; ++q) {
      if (sizes[i][q] == 0.0) {
        throw ParseError(
            fmt::format("missing size for segment {} level {}", i, q), row);
      }
      const double nominal = ladder.levels()[q].bitrate_kbps * 1000.0 *
                             segment_duration / 8.0;
      spread = std::max(spread, std::abs(sizes[i][q] / nominal - 1.0));
    }
  }
  return VideoModel(ladder, segment_duration, std::move(sizes), spread, 0);
}

VideoModel LoadVideoSizes(const std::string& path, const BitrateLadder& ladder,
                          double segment_duration) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open video sizes file " + path);
  return ParseVideoSizes(in, ladder, segment_duration);
}

void WriteVideoSizes(const VideoModel& video, std::ostream& out) {
  out << "segment_index,level_index,bytes\n";
  for (int i = 0; i < video.segment_count(); ++i) {
    for (int q = 0; q < video.ladder().size(); ++q) {
      out << fmt::format("{},{},{}\n", i, q, video.SizeOf(i, q));
    }
  }
}

}  // namespace abrsim
