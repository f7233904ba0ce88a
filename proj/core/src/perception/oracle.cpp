#include "etho/perception/oracle.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "etho/error.hpp"
#include "etho/util/text.hpp"

namespace etho::perception {
namespace {

using nlohmann::json;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::mt19937_64 request_rng(std::uint64_t seed, const json& ctx, Task task) {
  const auto frame = static_cast<std::uint64_t>(ctx.value("frame", 0LL));
  const auto view = util::hash_string(ctx.value("view", std::string()));
  const auto region = util::hash_string(ctx.value("region", std::string()));
  return std::mt19937_64(util::stream_seed(seed, {frame, view, region, static_cast<std::uint64_t>(task)}));
}

}  // namespace

void CorruptionSpec::validate() const {
  auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in01(p_swap)) throw ConfigError("corruption.p_swap must be in [0,1]");
  if (!in01(p_drop)) throw ConfigError("corruption.p_drop must be in [0,1]");
  if (!(box_jitter >= 0.0)) throw ConfigError("corruption.box_jitter must be >= 0");
}

std::size_t majority_segment(const std::vector<PlantedSegment>& planted, long long start, long long end) {
  std::size_t best = 0;
  long long best_overlap = -1;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    const long long overlap = std::min(end, planted[i].end) - std::max(start, planted[i].start);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = i;
    }
  }
  return best;
}

OracleTransport::OracleTransport(std::shared_ptr<const GroundTruth> truth, CorruptionSpec corruption)
    : truth_(std::move(truth)), corruption_(corruption) {
  if (!truth_) throw ConfigError("oracle transport needs ground truth");
  corruption_.validate();
}

std::string OracleTransport::complete(const PerceptionRequest& request) {
  const auto& ctx = request.context;
  switch (request.task) {
    case Task::kRegionDetect:
      return region_box(ctx).dump();
    case Task::kRegionAssign:
      return assign(ctx).dump();
    case Task::kReconcile:
      return reconcile(ctx).dump();
    case Task::kCaption:
      return caption(ctx).dump();
    case Task::kMerge:
      return merge(ctx).dump();
  }
  throw ClientUnavailable("oracle: unsupported task");
}

std::vector<InjectedSwap> OracleTransport::injected_swaps() const {
  std::lock_guard lock(mu_);
  return injected_;
}

const std::map<std::string, int>& OracleTransport::truth_for(long long frame, const std::string& view) const {
  static const std::map<std::string, int> kEmpty;
  auto it = truth_->pose.assignments.find({frame, view});
  return it == truth_->pose.assignments.end() ? kEmpty : it->second;
}

json OracleTransport::region_box(const json& ctx) const {
  const auto frame = ctx.at("frame").get<long long>();
  const auto view = ctx.at("view").get<std::string>();
  const auto region = ctx.at("region").get<std::string>();
  auto it = truth_->pose.regions.find({frame, view, region});
  if (it == truth_->pose.regions.end()) {
    throw ClientUnavailable("oracle: no region truth for frame " + std::to_string(frame) + " view " + view);
  }
  auto box = it->second;
  if (corruption_.box_jitter > 0.0) {
    auto rng = request_rng(corruption_.seed, ctx, Task::kRegionDetect);
    for (auto& v : box) v += (2.0 * uniform01(rng) - 1.0) * corruption_.box_jitter;
    if (box[2] <= box[0]) box[2] = box[0] + 1.0;
    if (box[3] <= box[1]) box[3] = box[1] + 1.0;
  }
  return {{"box", box}};
}

json OracleTransport::assign(const json& ctx) {
  const auto frame = ctx.at("frame").get<long long>();
  const auto view = ctx.at("view").get<std::string>();
  const auto& truth = truth_for(frame, view);
  std::set<int> candidates;
  for (const auto& c : ctx.at("candidates")) candidates.insert(c.get<int>());
  const auto keypoints = ctx.at("keypoints").get<std::vector<std::string>>();

  std::vector<std::optional<int>> answer;
  for (const auto& k : keypoints) {
    auto it = truth.find(k);
    if (it != truth.end() && candidates.contains(it->second)) {
      answer.emplace_back(it->second);
    } else {
      answer.emplace_back(std::nullopt);
    }
  }

  auto rng = request_rng(corruption_.seed, ctx, Task::kRegionAssign);
  std::vector<bool> swapped(keypoints.size(), false);
  std::vector<InjectedSwap> injected;
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    const double u = uniform01(rng);
    if (swapped[i] || !(u < corruption_.p_swap)) continue;
    std::vector<std::size_t> partners;
    for (std::size_t j = 0; j < keypoints.size(); ++j) {
      if (j != i && !swapped[j]) partners.push_back(j);
    }
    if (partners.empty()) continue;
    const auto j = partners[rng() % partners.size()];
    swapped[i] = swapped[j] = true;
    if (answer[i] != answer[j]) {
      std::swap(answer[i], answer[j]);
      injected.push_back({frame, view, keypoints[i], keypoints[j]});
    }
  }
  for (auto& a : answer) {
    if (uniform01(rng) < corruption_.p_drop) a.reset();
  }

  if (!injected.empty()) {
    std::lock_guard lock(mu_);
    injected_.insert(injected_.end(), injected.begin(), injected.end());
  }
  json out = json::object();
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    out[keypoints[i]] = answer[i] ? json(*answer[i]) : json(nullptr);
  }
  return {{"assignments", out}};
}

json OracleTransport::reconcile(const json& ctx) const {
  const auto frame = ctx.at("frame").get<long long>();
  const auto view = ctx.at("view").get<std::string>();
  const auto& truth = truth_for(frame, view);
  json result = ctx.at("partial");

  std::set<int> in_use;
  for (const auto& [k, v] : result.items()) {
    if (!v.is_null()) in_use.insert(v.get<int>());
  }
  for (const auto& conflict : ctx.value("conflicts", json::array())) {
    const int c = conflict.at("centroid").get<int>();
    for (const auto& claimant : conflict.at("claimants")) {
      const auto name = claimant.get<std::string>();
      auto t = truth.find(name);
      if (t != truth.end() && t->second == c) continue;  // rightful owner keeps it
      result[name] = nullptr;
    }
  }
  in_use.clear();
  for (const auto& [k, v] : result.items()) {
    if (!v.is_null()) in_use.insert(v.get<int>());
  }
  // Any conflict without a rightful claimant loses all claims above; fill
  // gaps from truth where the true centroid is free.
  std::set<int> candidates;
  for (const auto& c : ctx.at("candidates")) candidates.insert(c.get<int>());
  for (const auto& [k, v] : result.items()) {
    if (!v.is_null()) continue;
    auto t = truth.find(k);
    if (t == truth.end() || !candidates.contains(t->second) || in_use.contains(t->second)) continue;
    result[k] = t->second;
    in_use.insert(t->second);
  }
  return {{"assignments", result}};
}

json OracleTransport::caption(const json& ctx) const {
  const auto animal = ctx.at("animal").get<std::string>();
  const auto start = ctx.at("start").get<long long>();
  const auto end = ctx.at("end").get<long long>();
  auto it = truth_->behavior.planted.find(animal);
  if (it == truth_->behavior.planted.end() || it->second.empty()) {
    throw ClientUnavailable("oracle: no behavior truth for animal " + animal);
  }
  const auto& seg = it->second[majority_segment(it->second, start, end)];
  const auto& vocab = truth_->behavior.vocabulary.at(static_cast<std::size_t>(seg.behavior));
  std::string label = vocab.label;
  if (!vocab.variants.empty()) {
    const auto pick = util::stream_seed(corruption_.seed, {util::hash_string(animal),
                                                           static_cast<std::uint64_t>(start)});
    label = vocab.variants[pick % vocab.variants.size()];
  }
  return {{"label", label},
          {"description", animal + " " + vocab.description + " (frames " + std::to_string(start) + "-" +
                              std::to_string(end) + ")"}};
}

json OracleTransport::merge(const json& ctx) const {
  const auto animal = ctx.at("animal").get<std::string>();
  auto it = truth_->behavior.planted.find(animal);
  if (it == truth_->behavior.planted.end()) {
    throw ClientUnavailable("oracle: no behavior truth for animal " + animal);
  }
  json segments = json::array();
  std::optional<std::size_t> current;
  json group;
  auto flush = [&]() {
    if (!current) return;
    const auto& seg = it->second[*current];
    const auto& vocab = truth_->behavior.vocabulary.at(static_cast<std::size_t>(seg.behavior));
    segments.push_back({{"clips", group}, {"label", vocab.label}, {"description", vocab.description}});
  };
  for (const auto& clip : ctx.at("clips")) {
    const auto seg = majority_segment(it->second, clip.at("start").get<long long>(),
                                      clip.at("end").get<long long>());
    if (!current || seg != *current) {
      flush();
      current = seg;
      group = json::array();
    }
    group.push_back(clip.at("id"));
  }
  flush();
  return {{"segments", segments}};
}

}  // namespace etho::perception
