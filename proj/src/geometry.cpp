#include "mavdet/geometry.hpp"

#include "mavdet/error.hpp"

namespace mavdet {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimensions: return "invalid-dimensions";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::insufficient_matches: return "insufficient-matches";
    case ErrorCode::degenerate_configuration: return "degenerate-configuration";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::numeric_degeneracy: return "numeric-degeneracy";
    case ErrorCode::no_groundtruth: return "no-groundtruth";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::backend_unavailable: return "backend-unavailable";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::parse_error: return "parse-error";
  }
  return "unknown";
}

Box clamp_region(const Point2d& center, double side, int width, int height) {
  const double cap = static_cast<double>(std::min(width, height));
  const double s = std::round(std::clamp(side, 1.0, cap));
  double x = std::round(center.x() - s / 2.0);
  double y = std::round(center.y() - s / 2.0);
  x = std::clamp(x, 0.0, width - s);
  y = std::clamp(y, 0.0, height - s);
  return {x, y, s, s};
}

PixelRect to_pixel_rect(const Box& box) {
  const int x0 = static_cast<int>(std::floor(box.x));
  const int y0 = static_cast<int>(std::floor(box.y));
  const int x1 = static_cast<int>(std::ceil(box.right()));
  const int y1 = static_cast<int>(std::ceil(box.bottom()));
  return {x0, y0, x1 - x0, y1 - y0};
}

Box to_box(const PixelRect& rect) {
  return {double(rect.x), double(rect.y), double(rect.w), double(rect.h)};
}

}  // namespace mavdet
