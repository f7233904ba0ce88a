#include "etho/behavior/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "etho/error.hpp"
#include "etho/perception/schemas.hpp"
#include "etho/pose/stages.hpp"
#include "etho/util/text.hpp"

namespace etho::behavior {

using nlohmann::json;
using perception::PerceptionRequest;
using perception::Task;

const std::string_view kCaptionPrompt =
    "The attached {n_frames} frames show a {duration_s} s clip sampled at {fps} fps (source frames {start} to "
    "{end_incl}). Focus on animal {animal}; other animals may be visible and interactions with them should be "
    "described. Give (i) a concise behavioral label of at most 6 words and (ii) a description covering posture, "
    "movement direction, speed and any social interaction.\n"
    "Reply with JSON only: {\"label\": \"...\", \"description\": \"...\"}";

const std::string_view kMergePrompt =
    "Below are consecutive clip captions for animal {animal}, in temporal order. Group adjacent clips that show the "
    "same behavioral state. Every clip must belong to exactly one group, groups must contain consecutive clip ids "
    "and must not overlap. For each group give a refined label and a description.\n"
    "{clip_list}\n"
    "Reply with JSON only: {\"segments\": [{\"clips\": [ids...], \"label\": \"...\", \"description\": \"...\"}]}";

void CaptionConfig::validate() const {
  if (!(fps > 0.0)) throw ConfigError("caption.fps must be > 0");
  if (max_retries < 0) throw ConfigError("caption.max_retries must be >= 0");
}

void MergeConfig::validate() const {
  if (!(epoch_seconds > 0.0)) throw ConfigError("merge.epoch_seconds must be > 0");
  if (max_retries < 0) throw ConfigError("merge.max_retries must be >= 0");
}

std::vector<long long> downsample_frames(long long start, long long end, double source_fps, double target_fps) {
  if (end <= start) throw ValidationError("empty clip");
  if (!(source_fps > 0.0) || !(target_fps > 0.0)) throw ValidationError("frame rates must be > 0");
  std::vector<long long> out;
  if (source_fps <= target_fps) {
    for (long long f = start; f < end; ++f) out.push_back(f);
    return out;
  }
  const double duration = static_cast<double>(end - start) / source_fps;
  const auto count = std::max<long long>(1, std::llround(duration * target_fps));
  for (long long j = 0; j < count; ++j) {
    const auto f = start + static_cast<long long>(std::floor(static_cast<double>(j) * source_fps / target_fps));
    out.push_back(std::min(f, end - 1));
  }
  return out;
}

namespace {

std::string expand_frame(const std::string& tmpl, const std::string& animal, long long frame) {
  std::string t = tmpl;
  for (auto pos = t.find("{animal}"); pos != std::string::npos; pos = t.find("{animal}")) {
    t.replace(pos, 8, animal);
  }
  return util::expand_template(t, animal, frame);
}

}  // namespace

ClipCaption caption_clip(const ClipSegment& clip, int clip_id, double source_fps, const CaptionConfig& config,
                         const PerceptionClient& client) {
  config.validate();
  ClipCaption out;
  out.clip = clip;
  out.clip_id = clip_id;
  out.fps = std::min(config.fps, source_fps);
  out.frames = downsample_frames(clip.start, clip.end, source_fps, config.fps);

  PerceptionRequest req;
  req.task = Task::kCaption;
  req.schema_id = perception::kCaptionSchema;
  req.max_retries = config.max_retries;
  for (long long f : out.frames) {
    perception::Attachment a;
    if (!config.frame_template.empty()) a.path = expand_frame(config.frame_template, clip.animal, f);
    a.caption = "frame " + std::to_string(f);
    req.attachments.push_back(std::move(a));
  }
  req.context = {{"animal", clip.animal},
                 {"clip", clip_id},
                 {"start", clip.start},
                 {"end", clip.end},
                 {"fps", out.fps},
                 {"frames", out.frames}};
  req.prompt = pose::render_prompt(
      kCaptionPrompt, {{"n_frames", out.frames.size()},
                       {"duration_s", util::fmt_fixed(static_cast<double>(clip.end - clip.start) / source_fps, 2)},
                       {"fps", util::fmt_double(out.fps)},
                       {"start", clip.start},
                       {"end_incl", clip.end - 1},
                       {"animal", clip.animal}});
  try {
    const auto resp = client.call(req);
    out.attempts = resp.attempts;
    out.label = std::string(util::trim(resp.payload.at("label").get<std::string>()));
    out.description = std::string(util::trim(resp.payload.at("description").get<std::string>()));
  } catch (const ClientSchemaError& e) {
    out.attempts = e.attempts();
    out.uncaptioned = true;
    out.label = std::string(kUncaptionedLabel);
    out.description = std::string(kUncaptionedDescription);
  }
  return out;
}

namespace {

MergedSegment group_of(std::span<const ClipCaption> captions, std::size_t first, std::size_t last) {
  MergedSegment m;
  m.animal = captions[first].clip.animal;
  m.start = captions[first].clip.start;
  m.end = captions[last].clip.end;
  for (std::size_t i = first; i <= last; ++i) m.members.push_back(captions[i].clip_id);
  return m;
}

std::vector<MergedSegment> ask_client(std::span<const ClipCaption> captions, const MergeConfig& config,
                                      const PerceptionClient& client, MergeReport& report) {
  json clips = json::array();
  std::string listing;
  std::map<int, std::size_t> pos;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    const auto& c = captions[i];
    pos[c.clip_id] = i;
    clips.push_back({{"id", c.clip_id},
                     {"start", c.clip.start},
                     {"end", c.clip.end},
                     {"label", c.label},
                     {"description", c.description}});
    listing += "clip " + std::to_string(c.clip_id) + " [frames " + std::to_string(c.clip.start) + "-" +
               std::to_string(c.clip.end) + ") " + c.label + ": " + c.description + "\n";
  }
  PerceptionRequest req;
  req.task = Task::kMerge;
  req.schema_id = perception::kMergeSchema;
  req.max_retries = config.max_retries;
  req.context = {{"animal", captions.front().clip.animal}, {"clips", clips}};
  req.prompt = pose::render_prompt(kMergePrompt, {{"animal", captions.front().clip.animal}, {"clip_list", listing}});
  ++report.calls;
  const auto resp = client.call(req);
  report.attempts += resp.attempts;
  std::vector<MergedSegment> out;
  for (const auto& seg : resp.payload.at("segments")) {
    const auto ids = seg.at("clips").get<std::vector<int>>();
    auto m = group_of(captions, pos.at(ids.front()), pos.at(ids.back()));
    m.label = seg.at("label").get<std::string>();
    m.description = seg.at("description").get<std::string>();
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

std::vector<MergedSegment> merge_by_label(std::span<const ClipCaption> captions) {
  std::vector<MergedSegment> out;
  std::size_t first = 0;
  for (std::size_t i = 1; i <= captions.size(); ++i) {
    if (i == captions.size() || captions[i].label != captions[first].label) {
      auto m = group_of(captions, first, i - 1);
      m.label = captions[first].label;
      m.description = captions[first].description;
      m.fallback = true;
      out.push_back(std::move(m));
      first = i;
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> merge_epochs(std::span<const ClipCaption> captions, double fps,
                                                              double epoch_seconds) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t first = 0;
  while (first < captions.size()) {
    std::size_t last = first;
    double span = static_cast<double>(captions[first].clip.length()) / fps;
    while (last + 1 < captions.size()) {
      const double next = span + static_cast<double>(captions[last + 1].clip.length()) / fps;
      if (next > epoch_seconds) break;
      span = next;
      ++last;
    }
    out.emplace_back(first, last);
    if (last + 1 >= captions.size()) break;
    first = last > first ? last : last + 1;
  }
  return out;
}

std::vector<MergedSegment> merge_segments(std::span<const ClipCaption> captions, double fps,
                                          const MergeConfig& config, const PerceptionClient& client,
                                          MergeReport* report) {
  config.validate();
  MergeReport local;
  MergeReport& rep = report ? *report : local;
  if (captions.empty()) return {};
  for (std::size_t i = 1; i < captions.size(); ++i) {
    if (captions[i].clip.animal != captions[0].clip.animal) throw ValidationError("merge_segments: mixed animals");
    if (captions[i].clip.start != captions[i - 1].clip.end) {
      throw ValidationError("merge_segments: clips of animal '" + captions[0].clip.animal + "' are not contiguous");
    }
  }

  std::vector<MergedSegment> out;
  for (const auto& [first, last] : merge_epochs(captions, fps, config.epoch_seconds)) {
    const auto epoch = captions.subspan(first, last - first + 1);
    std::vector<MergedSegment> groups;
    try {
      groups = ask_client(epoch, config, client, rep);
    } catch (const ClientSchemaError&) {
      ++rep.fallbacks;
      groups = merge_by_label(epoch);
    } catch (const ClientUnavailable&) {
      ++rep.unavailable;
      ++rep.fallbacks;
      groups = merge_by_label(epoch);
    }
    std::size_t begin = 0;
    if (!out.empty() && out.back().members.back() == epoch.front().clip_id) {
      auto& prev = out.back();
      const auto& head = groups.front();
      const bool keep_prev = prev.members.size() >= head.members.size();
      std::vector<int> members = prev.members;
      for (int id : head.members) {
        if (id != members.back()) members.push_back(id);
      }
      if (!keep_prev) {
        prev.label = head.label;
        prev.description = head.description;
      }
      prev.members = std::move(members);
      prev.end = head.end;
      prev.fallback = prev.fallback || head.fallback;
      begin = 1;
    }
    out.insert(out.end(), groups.begin() + static_cast<std::ptrdiff_t>(begin), groups.end());
  }
  return out;
}

}  // namespace etho::behavior
