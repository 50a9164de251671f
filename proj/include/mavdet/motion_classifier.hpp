#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mavdet/error.hpp"
#include "mavdet/image.hpp"
#include "mavdet/motion_compensation.hpp"

namespace mavdet {

/// Displacements of the corners tracked inside one candidate box.
template <typename Scalar>
struct MotionVectors {
  std::vector<Point2<Scalar>> vectors;
  std::size_t count() const { return vectors.size(); }
};

template <typename Scalar>
struct MotionFeatures {
  Scalar angle_variance{0};     ///< f, radians^2
  Scalar velocity_variance{0};  ///< g, px^2
  Scalar mean_speed{0};         ///< lambda, px/frame
};

enum class MotionLabel { noise = 0, candidate = 1 };

struct MotionClassifierConfig {
  double t3 = 0.8;  ///< angle variance limit
  double t4 = 0.8;  ///< velocity variance limit
  double t5 = 1.0;  ///< minimum mean speed
  int max_corners = 50;
  double quality_level = 0.01;
  double min_distance = 2.0;
  int box_padding = 4;
  /// Extra context cropped around the padded box for flow tracking.
  int flow_margin = 24;
  LkParams lk{};
};

/// Arithmetic variance of atan2(dy, dx) about its mean; no wraparound correction.
template <typename Scalar>
Scalar angle_variance(const MotionVectors<Scalar>& v) {
  if (v.vectors.empty()) throw Error(ErrorCode::empty_input, "angle_variance of no vectors");
  const Scalar n = static_cast<Scalar>(v.count());
  Scalar mean = 0;
  for (const auto& d : v.vectors) mean += std::atan2(d.y(), d.x());
  mean /= n;
  Scalar var = 0;
  for (const auto& d : v.vectors) {
    const Scalar e = std::atan2(d.y(), d.x()) - mean;
    var += e * e;
  }
  return var / n;
}

/// (g, lambda): variance and mean of the vector magnitudes.
template <typename Scalar>
std::pair<Scalar, Scalar> velocity_stats(const MotionVectors<Scalar>& v) {
  if (v.vectors.empty()) throw Error(ErrorCode::empty_input, "velocity_stats of no vectors");
  const Scalar n = static_cast<Scalar>(v.count());
  Scalar mean = 0;
  for (const auto& d : v.vectors) mean += d.norm();
  mean /= n;
  Scalar var = 0;
  for (const auto& d : v.vectors) {
    const Scalar e = d.norm() - mean;
    var += e * e;
  }
  return {var / n, mean};
}

template <typename Scalar>
MotionFeatures<Scalar> motion_features(const MotionVectors<Scalar>& v) {
  const auto [g, lambda] = velocity_stats(v);
  return {angle_variance(v), g, lambda};
}

template <typename Scalar>
MotionLabel classify_motion(const MotionFeatures<Scalar>& f, double t3, double t4, double t5) {
  if (f.angle_variance > t3 || f.velocity_variance > t4 || f.mean_speed < t5) return MotionLabel::noise;
  return MotionLabel::candidate;
}

/// Shi-Tomasi corners inside `region`, strongest first.
std::vector<Point2d> detect_corners(const GrayImage& image, const PixelRect& region, int max_corners,
                                    double quality_level, double min_distance);

/// Corners found in `prev` inside the padded box, tracked into `cur`.
MotionVectors<double> extract_corner_flow(const GrayImage& prev, const GrayImage& cur, const Box& box,
                                          const MotionClassifierConfig& cfg = {});

/// Flow extraction plus classification; an empty vector set is noise.
MotionLabel classify_candidate(const GrayImage& prev, const GrayImage& cur, const Box& box,
                               const MotionClassifierConfig& cfg, MotionFeatures<double>* features = nullptr);

}  // namespace mavdet
