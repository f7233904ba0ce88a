#include "etho/geometry/calibration_io.hpp"

#include <set>

#include "etho/error.hpp"
#include "etho/util/text.hpp"

namespace etho::geometry {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (allowed.contains(key)) continue;
    if (key.find("dist") != std::string::npos || key == "k1" || key == "k2" || key == "p1" ||
        key == "p2" || key == "k3") {
      throw ConfigError(where + ": lens distortion key '" + key +
                        "' is not supported; undistort centroids before calibration input");
    }
    throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}

std::vector<double> numbers(const json& value, std::size_t n, const std::string& key,
                            const std::string& where) {
  if (!value.is_array() || value.size() != n) {
    throw ConfigError(where + ": key '" + key + "' must be an array of " + std::to_string(n) +
                      " numbers");
  }
  std::vector<double> out;
  for (const auto& v : value) {
    if (!v.is_number()) throw ConfigError(where + ": key '" + key + "' holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

Eigen::Matrix3d mat3(const std::vector<double>& v) {
  Eigen::Matrix3d m;
  m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  return m;
}

}  // namespace

std::vector<CameraModel> parse_calibration(const json& doc) {
  if (!doc.is_object()) throw ConfigError("calibration: document must be an object");
  reject_unknown(doc, {"version", "cameras"}, "calibration");
  const auto& cams = require(doc, "cameras", "calibration");
  if (!cams.is_array() || cams.empty()) {
    throw ConfigError("calibration: key 'cameras' must be a non-empty array");
  }
  std::vector<CameraModel> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const auto& c = cams[i];
    const std::string where = "calibration.cameras[" + std::to_string(i) + "]";
    if (!c.is_object()) throw ConfigError(where + ": must be an object");
    reject_unknown(c, {"name", "image_size", "intrinsics", "rotation", "translation"}, where);
    CameraModel cam;
    const auto& name = require(c, "name", where);
    if (!name.is_string()) throw ConfigError(where + ": key 'name' must be a string");
    cam.name = name.get<std::string>();
    auto size = numbers(require(c, "image_size", where), 2, "image_size", where);
    cam.image_size = {static_cast<int>(size[0]), static_cast<int>(size[1])};
    cam.intrinsics = mat3(numbers(require(c, "intrinsics", where), 9, "intrinsics", where));
    cam.rotation = mat3(numbers(require(c, "rotation", where), 9, "rotation", where));
    auto t = numbers(require(c, "translation", where), 3, "translation", where);
    cam.translation = {t[0], t[1], t[2]};
    cam.validate();
    if (!names.insert(cam.name).second) {
      throw ConfigError(where + ": duplicate camera name '" + cam.name + "'");
    }
    out.push_back(std::move(cam));
  }
  return out;
}

std::vector<CameraModel> read_calibration(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(util::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("calibration '" + path.string() + "': " + e.what());
  }
  return parse_calibration(doc);
}

json calibration_to_json(const std::vector<CameraModel>& cameras) {
  json cams = json::array();
  for (const auto& c : cameras) {
    json k = json::array(), r = json::array();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        k.push_back(c.intrinsics(row, col));
        r.push_back(c.rotation(row, col));
      }
    }
    cams.push_back({{"name", c.name},
                    {"image_size", {c.image_size.width, c.image_size.height}},
                    {"intrinsics", k},
                    {"rotation", r},
                    {"translation", {c.translation.x(), c.translation.y(), c.translation.z()}}});
  }
  return {{"version", 1}, {"cameras", cams}};
}

void write_calibration(const std::filesystem::path& path, const std::vector<CameraModel>& cameras) {
  util::write_file(path, calibration_to_json(cameras).dump(2) + "\n");
}

}  // namespace etho::geometry
