#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mavdet/homography.hpp"
#include "mavdet/image.hpp"

namespace mavdet {

struct KeypointMatch {
  Point2d prev{0, 0};
  Point2d cur{0, 0};
  /// Untracked pairs are excluded from every downstream statistic.
  bool tracked{false};
};

/// Pyramidal Lucas-Kanade settings. `levels` counts the pyramid levels above
/// the base image, so 3 means four resolutions.
struct LkParams {
  int levels = 3;
  int window = 21;
  int max_iterations = 30;
  double epsilon = 0.01;
  double fb_threshold = 1.0;
  /// Minimum eigenvalue of the windowed gradient matrix, per pixel, in
  /// (intensity / px)^2.
  double min_eigen = 1e-2;
};

struct RansacParams {
  double reprojection_threshold = 3.0;
  double confidence = 0.995;
  int max_iterations = 2000;
  int min_matches = 8;
  /// Estimates with |det| of the affine block below this are rejected.
  double min_affine_det = 1e-2;
  std::uint64_t seed = 0x5eed;
};

class ImagePyramid {
 public:
  ImagePyramid() = default;
  ImagePyramid(const GrayImage& base, int levels);

  int levels() const { return static_cast<int>(levels_.size()); }
  const FloatImage& level(int i) const { return levels_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<FloatImage> levels_;
};

/// cols x rows points at cell centers: ((i + 0.5) w / cols, (j + 0.5) h / rows).
std::vector<Point2d> sample_grid_keypoints(int width, int height, int cols = 30, int rows = 20);

std::vector<KeypointMatch> track_keypoints(const GrayImage& prev, const GrayImage& cur,
                                           std::span<const Point2d> points,
                                           const LkParams& params = {});

std::vector<KeypointMatch> track_keypoints(const ImagePyramid& prev, const ImagePyramid& cur,
                                           std::span<const Point2d> points,
                                           const LkParams& params = {});

struct HomographyFit {
  Homographyd transform;
  /// Parallel to the input matches; true for RANSAC inliers of the refit.
  std::vector<bool> inliers;
  int inlier_count{0};
};

/// RANSAC over tracked matches followed by a least-squares refit on the
/// inliers. Throws insufficient-matches or degenerate-configuration.
HomographyFit estimate_homography(std::span<const KeypointMatch> matches,
                                  const RansacParams& params = {});

/// Normalized DLT through all given point pairs (no outlier rejection).
Homographyd fit_homography_dlt(std::span<const Point2d> src, std::span<const Point2d> dst);

/// `prev` resampled into current-frame coordinates. Pixels whose source
/// falls outside `prev` are 0 in `image` and 0 in `valid`.
struct WarpedImage {
  GrayImage image;
  BinaryMask valid;
};

WarpedImage warp_frame(const GrayImage& prev, const Homographyd& h);

/// Mean |cur - H(prev)| over the tracked matches given.
double background_motion_term(std::span<const KeypointMatch> matches, const Homographyd& h);

struct MotionCompensationParams {
  int grid_cols = 30;
  int grid_rows = 20;
  LkParams lk;
  RansacParams ransac;
};

/// Result of aligning frame n-1 onto frame n.
struct Alignment {
  Homographyd transform;
  /// True when estimation failed and `transform` is the identity fallback.
  bool fallback{false};
  std::vector<KeypointMatch> matches;
  /// Inlier subset used for the background motion term.
  std::vector<KeypointMatch> inliers;
  double background_motion{0.0};
};

Alignment align_frames(const GrayImage& prev, const GrayImage& cur,
                       const MotionCompensationParams& params = {});

}  // namespace mavdet
