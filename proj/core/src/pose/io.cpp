#include "etho/pose/io.hpp"

#include <set>
#include <sstream>

#include "etho/error.hpp"
#include "etho/util/csv.hpp"
#include "etho/util/text.hpp"

namespace etho::pose {

using util::CsvTable;
using util::fmt_double;

namespace {

using FrameView = std::pair<long long, std::string>;

std::optional<int> optional_index(const CsvTable& t, std::size_t row, std::string_view column) {
  if (t.str(row, column).empty()) return std::nullopt;
  return static_cast<int>(t.integer(row, column));
}

Keypoint keypoint_at(const CsvTable& t, std::size_t row, const std::filesystem::path& path) {
  const auto& name = t.str(row, "keypoint");
  auto k = parse_keypoint(name);
  if (!k) throw ValidationError(path.string() + ": row " + std::to_string(row + 1) + ": unknown keypoint '" + name + "'");
  return *k;
}

}  // namespace

std::vector<FrameBundle> read_frames(const std::filesystem::path& centroids_path,
                                     const std::filesystem::path& bboxes_path, const consensus::CameraSet& cameras,
                                     std::string_view image_template) {
  const auto boxes = CsvTable::read(bboxes_path);
  boxes.require_columns({"frame", "view", "x0", "y0", "x1", "y1"});
  std::map<long long, FrameBundle> frames;
  for (std::size_t i = 0; i < boxes.rows(); ++i) {
    const long long f = boxes.integer(i, "frame");
    const auto& view = boxes.str(i, "view");
    auto cam = cameras.find(view);
    if (cam == cameras.end()) {
      throw ValidationError(bboxes_path.string() + ": row " + std::to_string(i + 1) + ": view '" + view +
                            "' is not in the calibration");
    }
    auto& bundle = frames[f];
    bundle.frame_index = f;
    if (bundle.views.contains(view)) {
      throw ValidationError(bboxes_path.string() + ": duplicate bbox for frame " + std::to_string(f) + " view '" +
                            view + "'");
    }
    FrameObservation obs;
    obs.frame_index = f;
    obs.view = view;
    obs.body_bbox = {boxes.num(i, "x0"), boxes.num(i, "y0"), boxes.num(i, "x1"), boxes.num(i, "y1")};
    obs.crop = compute_crop(obs.body_bbox, cam->second.image_size);
    if (!image_template.empty()) obs.image_ref = util::expand_template(image_template, view, f);
    bundle.views.emplace(view, std::move(obs));
  }

  const auto cents = CsvTable::read(centroids_path);
  cents.require_columns({"frame", "view", "index", "x", "y"});
  std::map<FrameView, std::map<int, PixelPoint>> points;
  for (std::size_t i = 0; i < cents.rows(); ++i) {
    const FrameView key{cents.integer(i, "frame"), cents.str(i, "view")};
    const int idx = static_cast<int>(cents.integer(i, "index"));
    if (!points[key].emplace(idx, PixelPoint{cents.num(i, "x"), cents.num(i, "y")}).second) {
      throw ValidationError(centroids_path.string() + ": duplicate centroid index " + std::to_string(idx) +
                            " in frame " + std::to_string(key.first) + " view '" + key.second + "'");
    }
  }
  for (auto& [key, pts] : points) {
    auto fit = frames.find(key.first);
    if (fit == frames.end() || !fit->second.views.contains(key.second)) {
      throw ValidationError(centroids_path.string() + ": frame " + std::to_string(key.first) + " view '" +
                            key.second + "' has centroids but no bbox");
    }
    auto& obs = fit->second.views.at(key.second);
    int expect = 0;
    for (const auto& [idx, p] : pts) {
      if (idx != expect++) {
        throw ValidationError(centroids_path.string() + ": frame " + std::to_string(key.first) + " view '" +
                              key.second + "': centroid indices must be 0..n-1");
      }
      obs.centroids.push_back(p);
    }
  }
  std::vector<FrameBundle> out;
  out.reserve(frames.size());
  for (auto& [f, bundle] : frames) {
    for (const auto& [view, obs] : bundle.views) obs.validate(cameras.at(view).image_size);
    out.push_back(std::move(bundle));
  }
  return out;
}

std::map<long long, AssignmentState> read_labels(const std::filesystem::path& path, Provenance default_provenance) {
  const auto t = CsvTable::read(path);
  t.require_columns({"frame", "view", "keypoint", "centroid"});
  const auto& header = t.header();
  const bool has_prov = std::find(header.begin(), header.end(), "provenance") != header.end();
  const bool has_flag = std::find(header.begin(), header.end(), "flagged") != header.end();
  std::map<long long, AssignmentState> out;
  std::map<FrameView, std::set<Keypoint>> seen;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const long long f = t.integer(i, "frame");
    const auto& view = t.str(i, "view");
    const auto k = keypoint_at(t, i, path);
    if (!seen[{f, view}].insert(k).second) {
      throw ValidationError(path.string() + ": keypoint " + std::string(name_of(k)) + " listed twice for frame " +
                            std::to_string(f) + " view '" + view + "'");
    }
    auto& st = out[f];
    st.frame_index = f;
    Slot& slot = st.views[view][k];
    slot.centroid = optional_index(t, i, "centroid");
    slot.provenance = default_provenance;
    if (has_prov) {
      auto p = parse_provenance(t.str(i, "provenance"));
      if (!p) throw ValidationError(path.string() + ": row " + std::to_string(i + 1) + ": unknown provenance");
      slot.provenance = *p;
    }
    if (has_flag) slot.flagged = t.integer(i, "flagged") != 0;
  }
  for (const auto& [key, ks] : seen) {
    if (ks.size() != kNumKeypoints) {
      throw ValidationError(path.string() + ": frame " + std::to_string(key.first) + " view '" + key.second +
                            "' lists " + std::to_string(ks.size()) + " of 12 keypoints");
    }
  }
  return out;
}

std::vector<ExemplarFrame> make_seeds(const std::map<long long, AssignmentState>& labels,
                                      const std::vector<FrameBundle>& frames) {
  std::vector<ExemplarFrame> out;
  for (const auto& [f, st] : labels) {
    auto it = std::find_if(frames.begin(), frames.end(), [&](const FrameBundle& b) { return b.frame_index == f; });
    if (it == frames.end()) throw ValidationError("seed frame " + std::to_string(f) + " has no observations");
    ExemplarFrame e;
    e.frame = *it;
    e.assignments = st;
    validate_seed(e);
    for (const auto& [view, obs] : e.frame.views) {
      e.regions[view] = regions_from_assignment(obs, st.views.at(view));
    }
    out.push_back(std::move(e));
  }
  return out;
}

RegionTable read_regions(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  t.require_columns({"frame", "view", "region", "x0", "y0", "x1", "y1"});
  RegionTable out;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    auto r = parse_region(t.str(i, "region"));
    if (!r) throw ValidationError(path.string() + ": row " + std::to_string(i + 1) + ": unknown region");
    out[{t.integer(i, "frame"), t.str(i, "view")}][index_of(*r)] = {t.num(i, "x0"), t.num(i, "y0"),
                                                                     t.num(i, "x1"), t.num(i, "y1")};
  }
  return out;
}

PointTable read_points(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  t.require_columns({"frame", "keypoint", "x", "y", "z"});
  PointTable out;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const auto k = keypoint_at(t, i, path);
    if (t.str(i, "x").empty()) continue;
    out[t.integer(i, "frame")][index_of(k)] = geometry::WorldPoint{t.num(i, "x"), t.num(i, "y"), t.num(i, "z")};
  }
  return out;
}

perception::PoseTruth read_pose_truth(const std::filesystem::path& labels, const std::filesystem::path& regions) {
  perception::PoseTruth truth;
  for (const auto& [f, st] : read_labels(labels)) {
    for (const auto& [view, va] : st.views) {
      auto& m = truth.assignments[{f, view}];
      for (auto k : all_keypoints()) {
        if (va[k].centroid) m[std::string(name_of(k))] = *va[k].centroid;
      }
    }
  }
  for (const auto& [key, boxes] : read_regions(regions)) {
    for (auto r : all_regions()) {
      const auto& b = boxes[index_of(r)];
      truth.regions[{key.first, key.second, std::string(name_of(r))}] = {b.x0, b.y0, b.x1, b.y1};
    }
  }
  return truth;
}

std::string centroid_rows(const FrameBundle& frame) {
  std::string out;
  for (const auto& [view, obs] : frame.views) {
    for (std::size_t i = 0; i < obs.centroids.size(); ++i) {
      out += std::to_string(frame.frame_index) + "," + view + "," + std::to_string(i) + "," +
             fmt_double(obs.centroids[i].x) + "," + fmt_double(obs.centroids[i].y) + "\n";
    }
  }
  return out;
}

std::string bbox_rows(const FrameBundle& frame) {
  std::string out;
  for (const auto& [view, obs] : frame.views) {
    const auto& b = obs.body_bbox;
    out += std::to_string(frame.frame_index) + "," + view + "," + fmt_double(b.x0) + "," + fmt_double(b.y0) + "," +
           fmt_double(b.x1) + "," + fmt_double(b.y1) + "\n";
  }
  return out;
}

std::string label_rows(const AssignmentState& state) {
  std::string out;
  for (const auto& [view, va] : state.views) {
    for (auto k : all_keypoints()) {
      const auto& c = va[k].centroid;
      out += std::to_string(state.frame_index) + "," + view + "," + std::string(name_of(k)) + "," +
             (c ? std::to_string(*c) : "") + "\n";
    }
  }
  return out;
}

std::string assignment_rows(const AssignmentState& state) {
  std::string out;
  for (const auto& [view, va] : state.views) {
    for (auto k : all_keypoints()) {
      const auto& s = va[k];
      out += std::to_string(state.frame_index) + "," + view + "," + std::string(name_of(k)) + "," +
             (s.centroid ? std::to_string(*s.centroid) : "") + "," + std::string(name_of(s.provenance)) + "," +
             (s.flagged ? "1" : "0") + "\n";
    }
  }
  return out;
}

std::string region_rows(long long frame, const std::map<std::string, RegionBoxes>& regions) {
  std::string out;
  for (const auto& [view, boxes] : regions) {
    for (auto r : all_regions()) {
      const auto& b = boxes[index_of(r)];
      out += std::to_string(frame) + "," + view + "," + std::string(name_of(r)) + "," + fmt_double(b.x0) + "," +
             fmt_double(b.y0) + "," + fmt_double(b.x1) + "," + fmt_double(b.y1) + "\n";
    }
  }
  return out;
}

std::string trajectory_rows(long long frame, const std::vector<consensus::KeypointResult>& estimates) {
  std::string out;
  for (const auto& r : estimates) {
    out += std::to_string(frame) + "," + std::string(name_of(r.keypoint)) + ",";
    if (r.estimate) {
      const auto& e = *r.estimate;
      out += fmt_double(e.point.x) + "," + fmt_double(e.point.y) + "," + fmt_double(e.point.z) + "," +
             fmt_double(e.mean_inlier_error) + "," + std::to_string(e.inlier_cameras.size()) + ",";
    } else {
      out += ",,,,0,";
    }
    out += r.status + "\n";
  }
  return out;
}

std::string qc_lines(long long frame, const std::vector<consensus::QcRecord>& records) {
  std::string out;
  for (const auto& q : records) out += consensus::to_json(q, frame).dump() + "\n";
  return out;
}

std::string json_lines(const std::vector<nlohmann::json>& entries) {
  std::string out;
  for (const auto& e : entries) out += e.dump() + "\n";
  return out;
}

}  // namespace etho::pose
