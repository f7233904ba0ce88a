#pragma once

#include <string>

#include "etho/perception/request.hpp"

namespace etho::perception {

struct EncodedImage {
  std::string mime;
  std::string bytes;
};

// Loads the attachment image, applies its crop, draws region boxes and
// numbered centroid markers, and encodes the result as PNG. Files without
// overlays or crop are passed through unchanged. Throws IoError.
EncodedImage render_attachment(const Attachment& attachment);

}  // namespace etho::perception
