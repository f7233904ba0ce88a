#include "etho/pose/stages.hpp"

#include <set>

#include "etho/error.hpp"
#include "etho/perception/schemas.hpp"

namespace etho::pose {
namespace {

using nlohmann::json;
using perception::Attachment;
using perception::PerceptionRequest;
using perception::Task;

perception::Color to_color(Rgb c) { return {c.r, c.g, c.b}; }

std::array<double, 4> arr(const Rect& r) { return {r.x0, r.y0, r.x1, r.y1}; }

json names(std::span<const Keypoint> keypoints) {
  json out = json::array();
  for (auto k : keypoints) out.push_back(name_of(k));
  return out;
}

json centroid_list(const FrameObservation& view, const std::vector<int>& indices) {
  json out = json::array();
  for (int i : indices) {
    const auto& c = view.centroids[static_cast<std::size_t>(i)];
    out.push_back({{"id", i}, {"x", c.x}, {"y", c.y}});
  }
  return out;
}

std::vector<perception::OverlayMarker> numbered(const FrameObservation& view, const std::vector<int>& indices) {
  std::vector<perception::OverlayMarker> out;
  for (int i : indices) {
    const auto& c = view.centroids[static_cast<std::size_t>(i)];
    out.push_back({c.x, c.y, std::to_string(i), to_color(kCentroidColor)});
  }
  return out;
}

const FrameObservation* exemplar_view(const ExemplarFrame& e, const std::string& view) {
  auto it = e.frame.views.find(view);
  return it == e.frame.views.end() ? nullptr : &it->second;
}

void note_failure(StageReport& report, const Error& e, const std::string& what) {
  report.degraded = true;
  if (dynamic_cast<const ClientUnavailable*>(&e)) {
    ++report.unavailable;
  } else {
    ++report.schema_failures;
  }
  report.warnings.push_back(what + ": " + e.what());
}

}  // namespace

const std::string_view kRegionDetectPrompt =
    "You are labeling a mouse recorded by camera {view}. The first {n_exemplars} images are the "
    "preceding frames with the {region} region ({keypoints}) outlined by a colored box. The last "
    "image is the current frame, cropped to the animal (crop origin {crop_x0}, {crop_y0} in full-frame "
    "pixels). Predict the bounding box of the {region} region in the current frame, in full-frame "
    "pixel coordinates.\n"
    "Reply with JSON only: {\"box\": [x0, y0, x1, y1]}\n"
    "Task context: {context}";

const std::string_view kRegionAssignPrompt =
    "Camera {view}, region {region}. The first {n_exemplars} images are crops of preceding frames "
    "where each numbered marker is labeled with its verified keypoint. The last image is the current "
    "crop; the candidate markers are numbered {candidates}. Assign each keypoint in {keypoints} to "
    "one candidate number, or null if it is not visible. Do not use a number twice.\n"
    "Reply with JSON only: {\"assignments\": {\"<keypoint>\": <number or null>, ...}}\n"
    "Task context: {context}";

const std::string_view kReconcilePrompt =
    "Camera {view}, full frame. Per-region assignments were merged and left these problems: "
    "conflicts (several keypoints claiming one centroid) {conflicts}; unused centroids {unused}. "
    "Current assignments: {partial}. Resolve the conflicts and fill gaps so every visible centroid "
    "has at most one keypoint. Return the complete assignment for all keypoints.\n"
    "Reply with JSON only: {\"assignments\": {\"<keypoint>\": <number or null>, ...}}\n"
    "Task context: {context}";

std::string render_prompt(std::string_view tmpl, const json& fields) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const std::string key(tmpl.substr(i + 1, close - i - 1));
        if (fields.contains(key)) {
          const auto& v = fields[key];
          out += v.is_string() ? v.get<std::string>() : v.dump();
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

void StageReport::absorb(const StageReport& o) {
  calls += o.calls;
  retries += o.retries;
  schema_failures += o.schema_failures;
  unavailable += o.unavailable;
  degraded = degraded || o.degraded;
  warnings.insert(warnings.end(), o.warnings.begin(), o.warnings.end());
}

RegionDetection detect_regions(const FrameObservation& view, const RollingWindow& window,
                               const PerceptionClient& client, int max_retries) {
  if (!window.full()) throw ValidationError("region detection needs a full exemplar window");
  RegionDetection out;
  for (auto r : all_regions()) {
    PerceptionRequest req;
    req.task = Task::kRegionDetect;
    req.schema_id = perception::kRegionBoxSchema;
    req.max_retries = max_retries;
    for (const auto& e : window.entries()) {
      const auto* ev = exemplar_view(e, view.view);
      if (!ev) continue;
      Attachment a;
      a.path = ev->image_ref;
      a.crop = arr(ev->crop);
      a.boxes.push_back({arr(e.regions.at(view.view)[index_of(r)]), to_color(region_color(r)),
                         std::string(name_of(r))});
      a.caption = "Exemplar frame " + std::to_string(e.frame_index()) + " (" + std::string(name_of(r)) + " box)";
      req.attachments.push_back(std::move(a));
    }
    const std::size_t n_exemplars = req.attachments.size();
    Attachment current;
    current.path = view.image_ref;
    current.crop = arr(view.crop);
    current.caption = "Current frame " + std::to_string(view.frame_index);
    req.attachments.push_back(std::move(current));
    req.context = {{"frame", view.frame_index},
                   {"view", view.view},
                   {"region", name_of(r)},
                   {"keypoints", names(region_keypoints(r))},
                   {"crop", arr(view.crop)}};
    req.prompt = render_prompt(kRegionDetectPrompt, {{"view", view.view},
                                                     {"region", name_of(r)},
                                                     {"keypoints", names(region_keypoints(r))},
                                                     {"n_exemplars", n_exemplars},
                                                     {"crop_x0", view.crop.x0},
                                                     {"crop_y0", view.crop.y0},
                                                     {"context", req.context}});
    ++out.report.calls;
    Rect box;
    bool ok = false;
    try {
      const auto resp = client.call(req);
      out.report.retries += resp.attempts - 1;
      const auto b = resp.payload.at("box").get<std::array<double, 4>>();
      const Rect raw{b[0], b[1], b[2], b[3]};
      box = raw.clamped_to(view.crop);
      if (!(box == raw)) {
        out.report.warnings.push_back("view " + view.view + " region " + std::string(name_of(r)) +
                                      ": box clamped to crop");
      }
      ok = !box.empty();
      if (!ok) out.report.warnings.push_back("view " + view.view + ": region box outside crop");
    } catch (const ClientSchemaError& e) {
      note_failure(out.report, e, "region-detect " + std::string(name_of(r)));
    } catch (const ClientUnavailable& e) {
      note_failure(out.report, e, "region-detect " + std::string(name_of(r)));
    }
    if (!ok) {
      out.report.degraded = true;
      const auto& prev = window.latest();
      const auto* pv = exemplar_view(prev, view.view);
      Rect fallback = view.crop;
      if (pv) {
        fallback = prev.regions.at(view.view)[index_of(r)]
                       .translated(view.crop.x0 - pv->crop.x0, view.crop.y0 - pv->crop.y0)
                       .clamped_to(view.crop);
        if (fallback.empty()) fallback = view.crop;
      }
      box = fallback;
    }
    out.boxes[index_of(r)] = box;
  }
  return out;
}

RegionAssignment assign_within_region(std::string_view region_name, std::span<const Keypoint> keypoints,
                                      const Rect& box, const FrameObservation& view,
                                      const RollingWindow& window, const PerceptionClient& client,
                                      int max_retries) {
  RegionAssignment out;
  for (auto k : keypoints) out.assignment[k] = std::nullopt;
  const auto candidates = view.centroids_in(box);
  if (candidates.empty()) return out;

  const auto region = parse_region(region_name);
  PerceptionRequest req;
  req.task = Task::kRegionAssign;
  req.schema_id = perception::kAssignSchema;
  req.max_retries = max_retries;
  json exemplars = json::array();
  for (const auto& e : window.entries()) {
    const auto* ev = exemplar_view(e, view.view);
    if (!ev) continue;
    const auto& va = e.assignments.views.at(view.view);
    Attachment a;
    a.path = ev->image_ref;
    a.crop = arr(region ? e.regions.at(view.view)[index_of(*region)] : ev->crop);
    json labels = json::object();
    for (auto k : keypoints) {
      const auto& c = va[k].centroid;
      labels[std::string(name_of(k))] = c ? json(*c) : json(nullptr);
      if (!c) continue;
      const auto p = ev->centroids[static_cast<std::size_t>(*c)];
      a.markers.push_back({p.x, p.y, std::to_string(*c) + ":" + std::string(name_of(k)),
                           to_color(region_color(region_of(k)))});
    }
    a.caption = "Exemplar frame " + std::to_string(e.frame_index()) + " with verified labels";
    req.attachments.push_back(std::move(a));
    exemplars.push_back({{"frame", e.frame_index()}, {"assignments", labels}});
  }
  const std::size_t n_exemplars = req.attachments.size();
  Attachment current;
  current.path = view.image_ref;
  current.crop = arr(box);
  current.markers = numbered(view, candidates);
  current.caption = "Current crop";
  req.attachments.push_back(std::move(current));
  req.context = {{"frame", view.frame_index},
                 {"view", view.view},
                 {"region", region_name},
                 {"keypoints", names(keypoints)},
                 {"candidates", candidates},
                 {"centroids", centroid_list(view, candidates)},
                 {"exemplars", exemplars}};
  req.prompt = render_prompt(kRegionAssignPrompt, {{"view", view.view},
                                                   {"region", region_name},
                                                   {"keypoints", names(keypoints)},
                                                   {"candidates", candidates},
                                                   {"n_exemplars", n_exemplars},
                                                   {"context", req.context}});
  ++out.report.calls;
  try {
    const auto resp = client.call(req);
    out.report.retries += resp.attempts - 1;
    const auto& a = resp.payload.at("assignments");
    for (auto k : keypoints) {
      const auto& v = a.at(std::string(name_of(k)));
      if (!v.is_null()) out.assignment[k] = v.get<int>();
    }
  } catch (const ClientSchemaError& e) {
    out.flagged = true;
    note_failure(out.report, e, "region-assign " + std::string(region_name));
  } catch (const ClientUnavailable& e) {
    out.flagged = true;
    note_failure(out.report, e, "region-assign " + std::string(region_name));
  }
  return out;
}

Reconciliation reconcile_frame(std::span<const PartialAssignment> partials, const FrameObservation& view,
                               const RollingWindow& /*window*/, const PerceptionClient& client,
                               int max_retries) {
  Reconciliation out;
  auto& merged = out.assignment;
  for (const auto& p : partials) {
    for (const auto& [k, v] : p) {
      merged[k].centroid = v;
      merged[k].provenance = Provenance::kStage2;
    }
  }

  std::map<int, std::vector<Keypoint>> claims;
  for (auto k : all_keypoints()) {
    if (merged[k].centroid) claims[*merged[k].centroid].push_back(k);
  }
  std::vector<int> unused;
  for (int i = 0; i < static_cast<int>(view.centroids.size()); ++i) {
    if (!claims.contains(i)) unused.push_back(i);
  }
  std::set<Keypoint> open;
  json conflicts = json::array();
  for (const auto& [c, who] : claims) {
    if (who.size() < 2) continue;
    conflicts.push_back({{"centroid", c}, {"claimants", names(who)}});
    open.insert(who.begin(), who.end());
  }
  const bool has_conflict = !conflicts.empty();
  std::vector<Keypoint> gaps;
  for (auto k : all_keypoints()) {
    if (!merged[k].centroid) gaps.push_back(k);
  }
  const bool fillable = !gaps.empty() && !unused.empty();
  if (!has_conflict && !fillable) return out;
  open.insert(gaps.begin(), gaps.end());

  json partial = json::object();
  for (auto k : all_keypoints()) {
    partial[std::string(name_of(k))] = merged[k].centroid ? json(*merged[k].centroid) : json(nullptr);
  }
  std::vector<int> all_ids(view.centroids.size());
  for (std::size_t i = 0; i < all_ids.size(); ++i) all_ids[i] = static_cast<int>(i);

  perception::PerceptionRequest req;
  req.task = perception::Task::kReconcile;
  req.schema_id = perception::kReconcileSchema;
  req.max_retries = max_retries;
  Attachment full;
  full.path = view.image_ref;
  full.crop = arr(view.crop);
  full.markers = numbered(view, all_ids);
  full.caption = "Current frame with all candidate centroids";
  req.attachments.push_back(std::move(full));
  req.context = {{"frame", view.frame_index},
                 {"view", view.view},
                 {"keypoints", names(all_keypoints())},
                 {"candidates", all_ids},
                 {"partial", partial},
                 {"conflicts", conflicts},
                 {"unused", unused}};
  req.prompt = render_prompt(kReconcilePrompt, {{"view", view.view},
                                                {"conflicts", conflicts},
                                                {"unused", unused},
                                                {"partial", partial},
                                                {"context", req.context}});
  out.client_invoked = true;
  ++out.report.calls;

  std::optional<json> reply;
  try {
    const auto resp = client.call(req);
    out.report.retries += resp.attempts - 1;
    reply = resp.payload.at("assignments");
  } catch (const ClientSchemaError& e) {
    note_failure(out.report, e, "reconcile");
  } catch (const ClientUnavailable& e) {
    note_failure(out.report, e, "reconcile");
  }

  std::set<int> used;
  for (auto k : all_keypoints()) {
    if (!open.contains(k) && merged[k].centroid) used.insert(*merged[k].centroid);
  }
  if (reply) {
    for (auto k : all_keypoints()) {
      if (!open.contains(k)) continue;
      const auto& v = reply->at(std::string(name_of(k)));
      auto& slot = merged[k];
      const std::optional<int> before = slot.centroid;
      slot.centroid.reset();
      if (!v.is_null() && !used.contains(v.get<int>())) {
        slot.centroid = v.get<int>();
        used.insert(*slot.centroid);
      } else if (!v.is_null()) {
        slot.flagged = true;
      }
      if (slot.centroid != before) slot.provenance = Provenance::kStage3;
    }
  } else {
    // Earliest claimant in canonical order keeps a contested centroid.
    for (auto k : all_keypoints()) {
      auto& slot = merged[k];
      if (!slot.centroid) continue;
      if (used.contains(*slot.centroid)) {
        slot.centroid.reset();
        slot.flagged = true;
        slot.provenance = Provenance::kStage3;
      } else if (open.contains(k)) {
        used.insert(*slot.centroid);
      }
    }
  }
  return out;
}

}  // namespace etho::pose
