#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

namespace mavdet {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Point2d = Point2<double>;

/// Axis-aligned box. Origin top-left, x right, y down; a mask blob covering
/// columns a..b has x = a, w = b - a + 1.
template <typename Scalar>
struct BBox {
  Scalar x{0};
  Scalar y{0};
  Scalar w{0};
  Scalar h{0};

  Scalar area() const { return w * h; }
  Scalar right() const { return x + w; }
  Scalar bottom() const { return y + h; }
  Point2<Scalar> center() const { return {x + w / Scalar(2), y + h / Scalar(2)}; }
  bool valid() const { return w > Scalar(0) && h > Scalar(0); }

  BBox translated(Scalar dx, Scalar dy) const { return {x + dx, y + dy, w, h}; }

  bool contains(const BBox& other) const {
    return other.x >= x && other.y >= y && other.right() <= right() && other.bottom() <= bottom();
  }

  bool operator==(const BBox&) const = default;
};

using Box = BBox<double>;

/// Integer pixel rectangle used for crops.
struct PixelRect {
  int x{0};
  int y{0};
  int w{0};
  int h{0};

  bool operator==(const PixelRect&) const = default;
};

template <typename Scalar>
Scalar intersection_area(const BBox<Scalar>& a, const BBox<Scalar>& b) {
  const Scalar iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const Scalar ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= Scalar(0) || ih <= Scalar(0)) return Scalar(0);
  return iw * ih;
}

template <typename Scalar>
Scalar iou(const BBox<Scalar>& a, const BBox<Scalar>& b) {
  const Scalar inter = intersection_area(a, b);
  if (inter <= Scalar(0)) return Scalar(0);
  return inter / (a.area() + b.area() - inter);
}

/// Intersection of two boxes; w/h are zero when disjoint.
template <typename Scalar>
BBox<Scalar> intersect(const BBox<Scalar>& a, const BBox<Scalar>& b) {
  const Scalar x0 = std::max(a.x, b.x);
  const Scalar y0 = std::max(a.y, b.y);
  const Scalar x1 = std::min(a.right(), b.right());
  const Scalar y1 = std::min(a.bottom(), b.bottom());
  return {x0, y0, std::max(Scalar(0), x1 - x0), std::max(Scalar(0), y1 - y0)};
}

/// Smallest box containing both.
template <typename Scalar>
BBox<Scalar> unite(const BBox<Scalar>& a, const BBox<Scalar>& b) {
  const Scalar x0 = std::min(a.x, b.x);
  const Scalar y0 = std::min(a.y, b.y);
  return {x0, y0, std::max(a.right(), b.right()) - x0, std::max(a.bottom(), b.bottom()) - y0};
}

/// Euclidean edge-to-edge gap; zero when the boxes touch or overlap.
template <typename Scalar>
Scalar gap_distance(const BBox<Scalar>& a, const BBox<Scalar>& b) {
  const Scalar dx = std::max(Scalar(0), std::max(a.x, b.x) - std::min(a.right(), b.right()));
  const Scalar dy = std::max(Scalar(0), std::max(a.y, b.y) - std::min(a.bottom(), b.bottom()));
  return std::sqrt(dx * dx + dy * dy);
}

/// side x side square around `center`, translated (never shrunk) to stay
/// inside width x height. The side is capped at min(width, height) and the
/// corner is snapped to whole pixels.
Box clamp_region(const Point2d& center, double side, int width, int height);

PixelRect to_pixel_rect(const Box& box);
Box to_box(const PixelRect& rect);

}  // namespace mavdet
