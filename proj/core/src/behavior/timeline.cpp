#include "etho/behavior/timeline.hpp"

#include <set>

#include "etho/error.hpp"
#include "etho/util/text.hpp"

namespace etho::behavior {

using nlohmann::json;

void BehaviorTimeline::validate() const {
  for (const auto& [animal, tl] : animals) {
    const std::string who = "animal '" + animal + "': ";
    if (tl.segments.empty()) throw ValidationError(who + "non-covering (no segments)");
    long long expect = 0;
    for (std::size_t i = 0; i < tl.segments.size(); ++i) {
      const auto& s = tl.segments[i];
      if (s.animal != animal) throw ValidationError(who + "segment " + std::to_string(i) + " belongs to '" + s.animal + "'");
      if (s.start >= s.end) throw ValidationError(who + "segment " + std::to_string(i) + " is empty");
      if (s.start > expect) throw ValidationError(who + "non-covering (gap at frame " + std::to_string(expect) + ")");
      if (s.start < expect) {
        throw ValidationError(who + (i > 0 && s.start < tl.segments[i - 1].start ? "unordered" : "overlapping") +
                              " at segment " + std::to_string(i));
      }
      expect = s.end;
    }
    if (expect != tl.frames) {
      throw ValidationError(who + "non-covering (ends at " + std::to_string(expect) + " of " +
                            std::to_string(tl.frames) + ")");
    }

    std::map<int, const ClipCaption*> by_id;
    for (const auto& c : tl.clips) {
      if (!by_id.emplace(c.clip_id, &c).second) throw ValidationError(who + "lineage: duplicate clip " + std::to_string(c.clip_id));
    }
    std::set<int> seen;
    for (const auto& s : tl.segments) {
      if (s.members.empty()) throw ValidationError(who + "lineage: segment without clips");
      long long at = s.start;
      for (std::size_t m = 0; m < s.members.size(); ++m) {
        const int id = s.members[m];
        auto it = by_id.find(id);
        if (it == by_id.end()) throw ValidationError(who + "lineage: unknown clip " + std::to_string(id));
        if (!seen.insert(id).second) throw ValidationError(who + "lineage: clip " + std::to_string(id) + " in two segments");
        if (it->second->clip.start != at) {
          throw ValidationError(who + "lineage: clip " + std::to_string(id) + " is not consecutive in its segment");
        }
        at = it->second->clip.end;
      }
      if (at != s.end) throw ValidationError(who + "lineage: members do not span their segment");
    }
    if (seen.size() != by_id.size()) throw ValidationError(who + "lineage: some clips are in no segment");
  }
}

BehaviorTimeline build_timeline(std::map<std::string, AnimalTimeline> animals, double fps, json metadata) {
  BehaviorTimeline tl;
  tl.fps = fps;
  tl.metadata = std::move(metadata);
  tl.animals = std::move(animals);
  tl.validate();
  return tl;
}

json to_json(const ClipCaption& c) {
  return {{"id", c.clip_id},
          {"animal", c.clip.animal},
          {"start", c.clip.start},
          {"end", c.clip.end},
          {"cluster", c.clip.cluster},
          {"label", c.label},
          {"description", c.description},
          {"fps", c.fps},
          {"frames", c.frames},
          {"attempts", c.attempts},
          {"uncaptioned", c.uncaptioned}};
}

ClipCaption caption_from_json(const json& j, double source_fps) {
  ClipCaption c;
  c.clip_id = j.at("id").get<int>();
  c.clip.animal = j.at("animal").get<std::string>();
  c.clip.start = j.at("start").get<long long>();
  c.clip.end = j.at("end").get<long long>();
  c.clip.cluster = j.at("cluster").get<int>();
  c.clip.duration = static_cast<double>(c.clip.end - c.clip.start) / source_fps;
  c.label = j.at("label").get<std::string>();
  c.description = j.at("description").get<std::string>();
  c.fps = j.at("fps").get<double>();
  c.frames = j.at("frames").get<std::vector<long long>>();
  c.attempts = j.at("attempts").get<int>();
  c.uncaptioned = j.at("uncaptioned").get<bool>();
  return c;
}

json to_json(const BehaviorTimeline& tl) {
  json animals = json::object();
  for (const auto& [animal, a] : tl.animals) {
    json clips = json::array();
    for (const auto& c : a.clips) clips.push_back(to_json(c));
    json segs = json::array();
    for (const auto& s : a.segments) {
      segs.push_back({{"start", s.start},
                      {"end", s.end},
                      {"label", s.label},
                      {"description", s.description},
                      {"clips", s.members},
                      {"fallback", s.fallback}});
    }
    animals[animal] = {{"frames", a.frames}, {"clips", clips}, {"segments", segs}};
  }
  return {{"version", kTimelineVersion}, {"fps", tl.fps}, {"metadata", tl.metadata}, {"animals", animals}};
}

BehaviorTimeline timeline_from_json(const json& doc) {
  if (doc.value("version", std::string()) != kTimelineVersion) {
    throw ValidationError("timeline: unsupported version '" + doc.value("version", std::string()) + "'");
  }
  BehaviorTimeline tl;
  tl.fps = doc.at("fps").get<double>();
  tl.metadata = doc.value("metadata", json::object());
  for (const auto& [animal, a] : doc.at("animals").items()) {
    AnimalTimeline at;
    at.frames = a.at("frames").get<long long>();
    for (const auto& c : a.at("clips")) at.clips.push_back(caption_from_json(c, tl.fps));
    for (const auto& s : a.at("segments")) {
      MergedSegment m;
      m.animal = animal;
      m.start = s.at("start").get<long long>();
      m.end = s.at("end").get<long long>();
      m.label = s.at("label").get<std::string>();
      m.description = s.at("description").get<std::string>();
      m.members = s.at("clips").get<std::vector<int>>();
      m.fallback = s.at("fallback").get<bool>();
      at.segments.push_back(std::move(m));
    }
    tl.animals[animal] = std::move(at);
  }
  tl.validate();
  return tl;
}

void write_timeline(const std::filesystem::path& path, const BehaviorTimeline& timeline) {
  util::write_file(path, to_json(timeline).dump(2) + "\n");
}

BehaviorTimeline read_timeline(const std::filesystem::path& path) {
  auto doc = json::parse(util::read_file(path), nullptr, false);
  if (doc.is_discarded()) throw ValidationError("timeline '" + path.string() + "' is not valid JSON");
  return timeline_from_json(doc);
}

namespace {
std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}
}  // namespace

std::string timeline_table(const BehaviorTimeline& tl) {
  std::string out = std::string(kTimelineTableHeader) + "\n";
  for (const auto& [animal, a] : tl.animals) {
    std::map<int, int> cluster;
    for (const auto& c : a.clips) cluster[c.clip_id] = c.clip.cluster;
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
      const auto& s = a.segments[i];
      std::vector<std::string> ids, clusters;
      for (int m : s.members) {
        ids.push_back(std::to_string(m));
        clusters.push_back(std::to_string(cluster[m]));
      }
      out += animal + "," + std::to_string(i) + "," + std::to_string(s.start) + "," + std::to_string(s.end) + "," +
             util::fmt_double(static_cast<double>(s.start) / tl.fps) + "," +
             util::fmt_double(static_cast<double>(s.end) / tl.fps) + "," + quoted(s.label) + "," +
             util::join(ids, ";") + "," + util::join(clusters, ";") + "," + (s.fallback ? "1" : "0") + "," +
             quoted(s.description) + "\n";
    }
  }
  return out;
}

}  // namespace etho::behavior
