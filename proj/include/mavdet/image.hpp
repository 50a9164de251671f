#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mavdet/error.hpp"
#include "mavdet/geometry.hpp"

namespace mavdet {

/// Row-major interleaved pixel plane. `Tag` keeps semantically different
/// planes of the same pixel type (gray, mask, difference) distinct types.
template <typename T, int Channels = 1, typename Tag = void>
class Plane {
 public:
  using value_type = T;
  static constexpr int channels = Channels;

  Plane() = default;
  Plane(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(checked(width, height)) * Channels, fill) {}
  Plane(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(checked(width, height)) * Channels)
      throw Error(ErrorCode::invalid_dimensions, "pixel buffer size does not match dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  T& operator()(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& operator()(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_ * Channels; }
  const T* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_ * Channels; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }
  const std::vector<T>& buffer() const { return data_; }

  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  bool same_shape(const auto& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Plane&) const = default;

 private:
  static int checked(int width, int height) {
    if (width < 0 || height < 0) throw Error(ErrorCode::invalid_dimensions, "negative image size");
    return width * height;
  }
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * Channels + c;
  }

  int width_{0};
  int height_{0};
  std::vector<T> data_;
};

struct GrayTag {};
struct MaskTag {};
struct DiffTag {};

using GrayImage = Plane<std::uint8_t, 1, GrayTag>;
/// Every element is 0 or 255.
using BinaryMask = Plane<std::uint8_t, 1, MaskTag>;
/// Non-negative absolute differences.
using DiffImage = Plane<std::uint8_t, 1, DiffTag>;
using FloatImage = Plane<float, 1>;
using RgbImage = Plane<std::uint8_t, 3>;

/// Decoded video frame; `index` is strictly increasing within a sequence.
struct Frame {
  int index{0};
  RgbImage rgb;

  int width() const { return rgb.width(); }
  int height() const { return rgb.height(); }
};

inline constexpr std::uint8_t kMaskOn = 255;

/// BT.601 luma, rounded to nearest.
GrayImage to_grayscale(const RgbImage& rgb);
inline GrayImage to_grayscale(const Frame& frame) { return to_grayscale(frame.rgb); }

RgbImage gray_to_rgb(const GrayImage& gray);
FloatImage to_float(const GrayImage& gray);

/// Copy of a sub-rectangle; the rectangle must lie inside the image.
template <typename T, int C, typename Tag>
Plane<T, C, Tag> crop(const Plane<T, C, Tag>& src, const PixelRect& r) {
  if (r.x < 0 || r.y < 0 || r.w <= 0 || r.h <= 0 || r.x + r.w > src.width() ||
      r.y + r.h > src.height())
    throw Error(ErrorCode::invalid_dimensions, "crop rectangle outside image");
  Plane<T, C, Tag> out(r.w, r.h);
  for (int y = 0; y < r.h; ++y) {
    const T* s = src.row(r.y + y) + static_cast<std::size_t>(r.x) * C;
    std::copy(s, s + static_cast<std::size_t>(r.w) * C, out.row(y));
  }
  return out;
}

inline Frame crop(const Frame& frame, const PixelRect& r) { return {frame.index, crop(frame.rgb, r)}; }

/// Bilinear sample with border replication; pixel centers at integer coordinates.
float sample_bilinear(const FloatImage& img, double x, double y);

/// Resample the box region of `src` to out_w x out_h with bilinear interpolation.
RgbImage resample_bilinear(const RgbImage& src, const Box& box, int out_w, int out_h);

bool is_constant(const GrayImage& img);

}  // namespace mavdet
