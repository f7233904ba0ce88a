#include "etho/perception/render.hpp"

#include <algorithm>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "etho/error.hpp"
#include "etho/util/text.hpp"

namespace etho::perception {
namespace {

cv::Scalar bgr(const Color& c) { return {static_cast<double>(c.b), static_cast<double>(c.g), static_cast<double>(c.r)}; }

std::string mime_for(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
  if (ext == "png") return "image/png";
  if (ext == "webp") return "image/webp";
  return "application/octet-stream";
}

}  // namespace

EncodedImage render_attachment(const Attachment& a) {
  if (!a.crop && a.boxes.empty() && a.markers.empty()) {
    return {mime_for(a.path), util::read_file(a.path)};
  }
  cv::Mat img = cv::imread(a.path, cv::IMREAD_COLOR);
  if (img.empty()) throw IoError("cannot decode image '" + a.path + "'");

  double ox = 0.0, oy = 0.0;
  if (a.crop) {
    const auto& c = *a.crop;
    const int x0 = std::clamp(static_cast<int>(c[0]), 0, img.cols - 1);
    const int y0 = std::clamp(static_cast<int>(c[1]), 0, img.rows - 1);
    const int x1 = std::clamp(static_cast<int>(c[2] + 0.999), x0 + 1, img.cols);
    const int y1 = std::clamp(static_cast<int>(c[3] + 0.999), y0 + 1, img.rows);
    img = img(cv::Rect(x0, y0, x1 - x0, y1 - y0)).clone();
    ox = x0;
    oy = y0;
  }
  for (const auto& b : a.boxes) {
    cv::rectangle(img, cv::Point2d(b.box[0] - ox, b.box[1] - oy), cv::Point2d(b.box[2] - ox, b.box[3] - oy),
                  bgr(b.color), 2);
    if (!b.label.empty()) {
      cv::putText(img, b.label, cv::Point2d(b.box[0] - ox + 2, b.box[1] - oy + 14),
                  cv::FONT_HERSHEY_SIMPLEX, 0.45, bgr(b.color), 1);
    }
  }
  for (const auto& m : a.markers) {
    const cv::Point2d p(m.x - ox, m.y - oy);
    cv::circle(img, p, 4, bgr(m.color), 1);
    cv::putText(img, m.label, p + cv::Point2d(5, -5), cv::FONT_HERSHEY_SIMPLEX, 0.45, bgr(m.color), 1);
  }
  std::vector<unsigned char> buf;
  if (!cv::imencode(".png", img, buf)) throw IoError("cannot encode rendering of '" + a.path + "'");
  return {"image/png", std::string(buf.begin(), buf.end())};
}

}  // namespace etho::perception
