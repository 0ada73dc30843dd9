#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "abrsim/session.h"

namespace abrsim {

using nlohmann::json;

void to_json(json& j, const DownloadRecord& r) {
  j = json{{"segment_index", r.segment_index},
           {"level", r.level},
           {"bytes", r.bytes},
           {"request_time", r.request_time},
           {"completion_time", r.completion_time},
           {"measured_throughput", r.measured_throughput}};
}

void from_json(const json& j, DownloadRecord& r) {
  j.at("segment_index").get_to(r.segment_index);
  j.at("level").get_to(r.level);
  j.at("bytes").get_to(r.bytes);
  j.at("request_time").get_to(r.request_time);
  j.at("completion_time").get_to(r.completion_time);
  j.at("measured_throughput").get_to(r.measured_throughput);
}

void to_json(json& j, const Decision& d) {
  j = json{{"time", d.time}, {"old_q", d.old_q}, {"new_q", d.new_q}};
}

void from_json(const json& j, Decision& d) {
  j.at("time").get_to(d.time);
  j.at("old_q").get_to(d.old_q);
  j.at("new_q").get_to(d.new_q);
}

void to_json(json& j, const ChunkPlayback& c) {
  j = json{{"segment_index", c.segment_index},
           {"q", c.level},
           {"scheduled_duration", c.scheduled_duration},
           {"actual_duration", c.actual_duration},
           {"start_wall_time", c.start_wall_time}};
}

void from_json(const json& j, ChunkPlayback& c) {
  j.at("segment_index").get_to(c.segment_index);
  j.at("q").get_to(c.level);
  j.at("scheduled_duration").get_to(c.scheduled_duration);
  j.at("actual_duration").get_to(c.actual_duration);
  j.at("start_wall_time").get_to(c.start_wall_time);
}

void to_json(json& j, const Stall& s) {
  j = json{{"start", s.start},
           {"duration", s.duration},
           {"before_segment", s.before_segment}};
}

void from_json(const json& j, Stall& s) {
  j.at("start").get_to(s.start);
  j.at("duration").get_to(s.duration);
  j.at("before_segment").get_to(s.before_segment);
}

void to_json(json& j, const TimelinePoint& p) {
  j = json{{"time", p.time}, {"buffer_level", p.buffer_level}, {"q", p.q}};
}

void from_json(const json& j, TimelinePoint& p) {
  j.at("time").get_to(p.time);
  j.at("buffer_level").get_to(p.buffer_level);
  j.at("q").get_to(p.q);
}

std::string SessionLogToJson(const SessionLog& log) {
  json j{{"complete", log.complete},
         {"abort_reason", log.abort_reason},
         {"initial_buffering", log.initial_buffering},
         {"end_time", log.end_time},
         {"downloads", log.downloads},
         {"decisions", log.decisions},
         {"chunk_playbacks", log.chunk_playbacks},
         {"stalls", log.stalls},
         {"timeline", log.timeline}};
  return j.dump(1) + "\n";
}

SessionLog SessionLogFromJson(const std::string& text) {
  SessionLog log;
  try {
    const json j = json::parse(text);
    j.at("complete").get_to(log.complete);
    j.at("abort_reason").get_to(log.abort_reason);
    j.at("initial_buffering").get_to(log.initial_buffering);
    j.at("end_time").get_to(log.end_time);
    j.at("downloads").get_to(log.downloads);
    j.at("decisions").get_to(log.decisions);
    j.at("chunk_playbacks").get_to(log.chunk_playbacks);
    j.at("stalls").get_to(log.stalls);
    j.at("timeline").get_to(log.timeline);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed session log: ") + e.what());
  }
  return log;
}

std::string ChunkPlaybacksToCsv(const SessionLog& log) {
  std::string out =
      "segment_index,q,scheduled_duration_s,actual_duration_s,start_wall_time_s\n";
  for (const auto& c : log.chunk_playbacks) {
    out += fmt::format("{},{},{},{},{}\n", c.segment_index, c.level,
                       c.scheduled_duration, c.actual_duration,
                       c.start_wall_time);
  }
  return out;
}

std::string TimeseriesToCsv(const SessionLog& log,
                            const BandwidthTrace& trace) {
  std::string out = "time_s,buffer_level_s,q,throughput_kbps\n";
  for (const auto& p : log.timeline) {
    out += fmt::format("{},{},{},{}\n", p.time, p.buffer_level, p.q,
                       trace.ThroughputAt(p.time));
  }
  return out;
}

}  // namespace abrsim
