#include "etho/synth/features.hpp"

#include <cmath>
#include <random>

#include "etho/error.hpp"
#include "etho/util/text.hpp"

namespace etho::synth {

using nlohmann::json;

void FeatureSessionConfig::validate() const {
  if (animals.empty()) throw ConfigError("session.animals must not be empty");
  if (frames < 2) throw ConfigError("session.frames must be >= 2");
  if (!(fps > 0.0)) throw ConfigError("session.fps must be > 0");
  if (dim < 1) throw ConfigError("session.dim must be >= 1");
  if (behaviors < 2) throw ConfigError("session.behaviors must be >= 2");
  if (!(min_segment_s > 0.0) || !(max_segment_s >= min_segment_s)) {
    throw ConfigError("session segment durations must satisfy 0 < min <= max");
  }
  if (!(separation >= 0.0) || !(noise >= 0.0)) throw ConfigError("session.separation and noise must be >= 0");
}

std::vector<PlantedSegment> plant_segments(long long frames, double fps, double min_s, double max_s, int behaviors,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dur(min_s, max_s);
  const auto min_frames = std::max<long long>(1, std::llround(min_s * fps));
  std::vector<PlantedSegment> out;
  long long at = 0;
  int last = -1;
  while (at < frames) {
    const auto len = std::max<long long>(1, std::llround(dur(rng) * fps));
    int b = static_cast<int>(rng() % static_cast<std::uint64_t>(behaviors - (last < 0 ? 0 : 1)));
    if (last >= 0 && b >= last) ++b;
    const long long end = std::min(frames, at + len);
    if (end - at < min_frames && !out.empty()) {
      out.back().end = end;
      break;
    }
    out.push_back({at, end, b});
    last = b;
    at = end;
  }
  return out;
}

std::vector<int> planted_labels(const std::vector<PlantedSegment>& planted) {
  std::vector<int> out;
  for (const auto& s : planted) out.insert(out.end(), static_cast<std::size_t>(s.end - s.start), s.behavior);
  return out;
}

std::vector<perception::BehaviorVocabulary> default_vocabulary(int behaviors) {
  static const std::vector<perception::BehaviorVocabulary> kBase = {
      {"walking", {"walking", "walking forward", "slow locomotion"}, "walks along the arena at moderate speed"},
      {"rearing", {"rearing", "rearing up", "upright rearing"}, "stands on its hind paws with the body upright"},
      {"grooming", {"grooming", "self-grooming", "face grooming"}, "sits hunched and strokes its face with the forepaws"},
      {"resting", {"resting", "resting still", "immobile rest"}, "lies still with the body curled"},
      {"sniffing", {"sniffing", "sniffing the floor", "nose exploration"}, "moves its nose along the floor slowly"},
      {"chasing", {"chasing", "chasing another mouse", "fast pursuit"}, "runs quickly behind another animal"},
      {"huddling", {"huddling", "huddling together", "side-by-side huddle"}, "rests in body contact with another animal"},
      {"oral contact", {"oral contact", "nose-to-nose contact", "facial investigation"}, "touches another animal's face with its nose"},
      {"digging", {"digging", "digging bedding", "bedding displacement"}, "pushes bedding backward with its forepaws"},
      {"turning", {"turning", "turning in place", "body rotation"}, "rotates its body on the spot"},
  };
  std::vector<perception::BehaviorVocabulary> out;
  for (int b = 0; b < behaviors; ++b) {
    auto v = kBase[static_cast<std::size_t>(b) % kBase.size()];
    if (b >= static_cast<int>(kBase.size())) {
      const std::string suffix = " " + std::to_string(b / static_cast<int>(kBase.size()) + 1);
      v.label += suffix;
      for (auto& w : v.variants) w += suffix;
    }
    out.push_back(std::move(v));
  }
  return out;
}

FeatureSession generate_feature_session(const std::map<std::string, std::vector<PlantedSegment>>& planted,
                                        const FeatureSessionConfig& config, std::uint64_t seed) {
  config.validate();
  FeatureSession out;
  std::mt19937_64 center_rng(util::stream_seed(seed, {0}));
  std::normal_distribution<double> n01(0.0, 1.0);
  out.centers.resize(config.behaviors, config.dim);
  for (int b = 0; b < config.behaviors; ++b) {
    for (int d = 0; d < config.dim; ++d) out.centers(b, d) = config.separation * n01(center_rng);
  }
  out.truth.vocabulary = default_vocabulary(config.behaviors);
  for (const auto& animal : config.animals) {
    auto it = planted.find(animal);
    if (it == planted.end()) throw ValidationError("no planted segments for animal '" + animal + "'");
    long long at = 0;
    for (const auto& s : it->second) {
      if (s.start != at || s.end <= s.start) throw ValidationError("planted segments of '" + animal + "' do not partition the session");
      if (s.behavior < 0 || s.behavior >= config.behaviors) throw ValidationError("planted behavior out of range");
      at = s.end;
    }
    if (at != config.frames) throw ValidationError("planted segments of '" + animal + "' do not cover the session");

    behavior::FeatureSequence seq;
    seq.animal = animal;
    seq.fps = config.fps;
    seq.x.resize(config.frames, config.dim);
    std::mt19937_64 rng(util::stream_seed(seed, {1, util::hash_string(animal)}));
    for (const auto& s : it->second) {
      for (long long f = s.start; f < s.end; ++f) {
        for (int d = 0; d < config.dim; ++d) seq.x(f, d) = out.centers(s.behavior, d) + config.noise * n01(rng);
      }
    }
    out.sequences.push_back(std::move(seq));
    out.truth.planted[animal] = it->second;
  }
  return out;
}

FeatureSession generate_feature_session(const FeatureSessionConfig& config, std::uint64_t seed) {
  config.validate();
  std::map<std::string, std::vector<PlantedSegment>> planted;
  for (const auto& animal : config.animals) {
    planted[animal] = plant_segments(config.frames, config.fps, config.min_segment_s, config.max_segment_s,
                                     config.behaviors, util::stream_seed(seed, {2, util::hash_string(animal)}));
  }
  return generate_feature_session(planted, config, seed);
}

json to_json(const BehaviorTruth& truth) {
  json planted = json::object();
  for (const auto& [animal, segs] : truth.planted) {
    json arr = json::array();
    for (const auto& s : segs) arr.push_back({{"start", s.start}, {"end", s.end}, {"behavior", s.behavior}});
    planted[animal] = arr;
  }
  json vocab = json::array();
  for (const auto& v : truth.vocabulary) {
    vocab.push_back({{"label", v.label}, {"variants", v.variants}, {"description", v.description}});
  }
  return {{"planted", planted}, {"vocabulary", vocab}};
}

BehaviorTruth behavior_truth_from_json(const json& doc) {
  BehaviorTruth truth;
  for (const auto& [animal, segs] : doc.at("planted").items()) {
    for (const auto& s : segs) {
      truth.planted[animal].push_back(
          {s.at("start").get<long long>(), s.at("end").get<long long>(), s.at("behavior").get<int>()});
    }
  }
  for (const auto& v : doc.at("vocabulary")) {
    truth.vocabulary.push_back({v.at("label").get<std::string>(), v.value("variants", std::vector<std::string>{}),
                                v.at("description").get<std::string>()});
  }
  return truth;
}

}  // namespace etho::synth
