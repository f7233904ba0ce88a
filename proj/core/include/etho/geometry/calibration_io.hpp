#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "etho/geometry/camera.hpp"

namespace etho::geometry {

// Calibration document:
//
//   {
//     "version": 1,                       (optional)
//     "cameras": [
//       { "name": "cam0",
//         "image_size": [2048, 1400],
//         "intrinsics": [fx, s, cx, 0, fy, cy, 0, 0, 1],   row-major
//         "rotation":   [9 values, row-major, world->camera],
//         "translation": [tx, ty, tz] }                     millimeters
//     ]
//   }
//
// Unknown keys are rejected. Distortion fields are rejected explicitly since
// the camera model has no distortion terms.
std::vector<CameraModel> parse_calibration(const nlohmann::json& doc);
std::vector<CameraModel> read_calibration(const std::filesystem::path& path);

nlohmann::json calibration_to_json(const std::vector<CameraModel>& cameras);
void write_calibration(const std::filesystem::path& path, const std::vector<CameraModel>& cameras);

}  // namespace etho::geometry
