#include "mavdet/image.hpp"

#include <algorithm>
#include <cmath>

namespace mavdet {

GrayImage to_grayscale(const RgbImage& rgb) {
  GrayImage out(rgb.width(), rgb.height());
  const auto src = rgb.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    // Fixed-point 0.299/0.587/0.114 with weights summing to 1000.
    const int r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
  }
  return out;
}

RgbImage gray_to_rgb(const GrayImage& gray) {
  RgbImage out(gray.width(), gray.height());
  const auto src = gray.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  return out;
}

FloatImage to_float(const GrayImage& gray) {
  FloatImage out(gray.width(), gray.height());
  std::copy(gray.pixels().begin(), gray.pixels().end(), out.pixels().begin());
  return out;
}

float sample_bilinear(const FloatImage& img, double x, double y) {
  const int w = img.width(), h = img.height();
  x = std::clamp(x, 0.0, double(w - 1));
  y = std::clamp(y, 0.0, double(h - 1));
  const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const float ax = static_cast<float>(x - x0), ay = static_cast<float>(y - y0);
  const float top = img(x0, y0) * (1 - ax) + img(x1, y0) * ax;
  const float bot = img(x0, y1) * (1 - ax) + img(x1, y1) * ax;
  return top * (1 - ay) + bot * ay;
}

RgbImage resample_bilinear(const RgbImage& src, const Box& box, int out_w, int out_h) {
  RgbImage out(out_w, out_h);
  const int w = src.width(), h = src.height();
  const double sx = box.w / out_w, sy = box.h / out_h;
  for (int oy = 0; oy < out_h; ++oy) {
    // Map output pixel centers onto the box, area-aligned.
    const double y = std::clamp(box.y + (oy + 0.5) * sy - 0.5, 0.0, double(h - 1));
    const int y0 = static_cast<int>(y), y1 = std::min(y0 + 1, h - 1);
    const double ay = y - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      const double x = std::clamp(box.x + (ox + 0.5) * sx - 0.5, 0.0, double(w - 1));
      const int x0 = static_cast<int>(x), x1 = std::min(x0 + 1, w - 1);
      const double ax = x - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = src(x0, y0, c) * (1 - ax) + src(x1, y0, c) * ax;
        const double bot = src(x0, y1, c) * (1 - ax) + src(x1, y1, c) * ax;
        out(ox, oy, c) = static_cast<std::uint8_t>(std::lround(top * (1 - ay) + bot * ay));
      }
    }
  }
  return out;
}

bool is_constant(const GrayImage& img) {
  const auto px = img.pixels();
  if (px.empty()) return true;
  return std::all_of(px.begin(), px.end(), [v = px.front()](std::uint8_t p) { return p == v; });
}

}  // namespace mavdet
