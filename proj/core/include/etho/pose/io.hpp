#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "etho/consensus/qc.hpp"
#include "etho/consensus/refine.hpp"
#include "etho/perception/oracle.hpp"
#include "etho/pose/window.hpp"

// Line-oriented pose files. All tables are comma-separated with a header row;
// an empty centroid field means "unassigned".
namespace etho::pose {

inline constexpr std::string_view kCentroidsHeader = "frame,view,index,x,y";
inline constexpr std::string_view kBBoxesHeader = "frame,view,x0,y0,x1,y1";
inline constexpr std::string_view kLabelsHeader = "frame,view,keypoint,centroid";
inline constexpr std::string_view kAssignmentsHeader = "frame,view,keypoint,centroid,provenance,flagged";
inline constexpr std::string_view kRegionsHeader = "frame,view,region,x0,y0,x1,y1";
inline constexpr std::string_view kTrajectoryHeader = "frame,keypoint,x,y,z,mean_error,inliers,status";
inline constexpr std::string_view kPointsHeader = "frame,keypoint,x,y,z";

// Joins centroid and bbox tables into frames sorted by index. Crops are
// derived from the bbox and the view's image size. `image_template` (with
// {view} and {frame} fields) fills image_ref when non-empty.
std::vector<FrameBundle> read_frames(const std::filesystem::path& centroids, const std::filesystem::path& bboxes,
                                     const consensus::CameraSet& cameras, std::string_view image_template = {});

// Reads a label or assignment table. Every listed view must list all twelve
// keypoints. Provenance and flagged columns are optional.
std::map<long long, AssignmentState> read_labels(const std::filesystem::path& path,
                                                 Provenance default_provenance = Provenance::kSeed);

// Seed exemplars for the given label frames; region boxes come from the
// labeled centroids. Throws ValidationError for frames missing from `frames`.
std::vector<ExemplarFrame> make_seeds(const std::map<long long, AssignmentState>& labels,
                                      const std::vector<FrameBundle>& frames);

using RegionTable = std::map<std::pair<long long, std::string>, RegionBoxes>;
RegionTable read_regions(const std::filesystem::path& path);

using PointTable = std::map<long long, std::array<std::optional<geometry::WorldPoint>, kNumKeypoints>>;
PointTable read_points(const std::filesystem::path& path);

// Ground-truth label and region tables for the oracle client.
perception::PoseTruth read_pose_truth(const std::filesystem::path& labels, const std::filesystem::path& regions);

// Row formatters; each returns complete lines without a header.
std::string centroid_rows(const FrameBundle& frame);
std::string bbox_rows(const FrameBundle& frame);
std::string label_rows(const AssignmentState& state);
std::string assignment_rows(const AssignmentState& state);
std::string region_rows(long long frame, const std::map<std::string, RegionBoxes>& regions);
std::string trajectory_rows(long long frame, const std::vector<consensus::KeypointResult>& estimates);
std::string qc_lines(long long frame, const std::vector<consensus::QcRecord>& records);
std::string json_lines(const std::vector<nlohmann::json>& entries);

}  // namespace etho::pose
