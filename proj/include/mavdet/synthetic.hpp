#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mavdet/annotations.hpp"
#include "mavdet/geometry.hpp"
#include "mavdet/homography.hpp"
#include "mavdet/image.hpp"

namespace mavdet {

enum class BackgroundType { noise, checker, structures, textureless };
enum class TargetShape { disc, quad };

/// Per-frame camera motion about the image center.
struct CameraMotion {
  double tx{0};
  double ty{0};
  double rotation_deg{0};
  double zoom{0};    ///< relative scale change per frame
  double tilt_x{0};  ///< perspective terms of the bottom row, per pixel
  double tilt_y{0};
};

/// Frame-to-frame transform mapping frame n-1 pixel coordinates to frame n.
Homographyd camera_homography(const CameraMotion& m, int width, int height);

/// image: linear in pixel space, bouncing off the margin. world: linear over
/// the background, following the camera. relative: each frame the camera
/// carries the target and it then moves by `velocity`, bouncing off the margin.
enum class Anchor { image, world, relative };

struct TargetConfig {
  TargetShape shape{TargetShape::disc};
  double size{12};  ///< diameter or side, px
  double angle_deg{0};
  /// Start center; defaults to the frame center when unset.
  std::optional<Point2d> start;
  Point2d velocity{3, 1.5};
  Anchor anchor{Anchor::relative};
  int contrast{-100}; ///< base intensity relative to the background mean
  int texture{30};    ///< checker amplitude inside the silhouette
  int cell{3};        ///< checker cell, px
};

struct SceneConfig {
  int frames{100};
  int width{640};
  int height{480};
  std::uint64_t seed{1};

  BackgroundType background{BackgroundType::noise};
  double texture_amplitude{30};
  std::vector<double> texture_periods{16, 32, 64, 128};
  int background_mean{150};

  CameraMotion camera;
  /// Uniform per-frame perturbation with these half-ranges.
  CameraMotion camera_random;

  std::optional<TargetConfig> target = TargetConfig{};
  std::optional<TargetConfig> second_mover;
  int flicker_patches{0};
  int flicker_size{10};
  int flicker_amplitude{30};

  /// Largest per-frame change of the global brightness offset; offsets are
  /// drawn from [-max_step/2, max_step/2] so consecutive frames differ by at
  /// most max_step.
  int brightness_max_step{0};

  void validate() const;
};

struct SceneTruth {
  std::vector<std::optional<Box>> boxes;
  /// Frame n-1 to frame n; entry 0 is the identity.
  std::vector<Homographyd> homographies;
  std::vector<CameraMotion> motions;
  /// Target center per frame (box convention); empty optional if no target.
  std::vector<std::optional<Point2d>> centers;
  /// centers[n] - centers[n-1]; entry 0 is zero.
  std::vector<Point2d> velocities;
  /// Displacement left after camera motion: centers[n] - H*_n(centers[n-1]).
  std::vector<Point2d> relative_velocities;
  std::vector<int> brightness;
};

struct Scene {
  std::vector<Frame> frames;
  SceneTruth truth;
};

Scene generate(const SceneConfig& config);

GroundTruth ground_truth(const SceneTruth& truth);

/// Named starting points for the CLI and tests.
SceneConfig scene_preset(const std::string& name);
std::vector<std::string> scene_preset_names();

/// Writes `%06d.png` frames, gt.csv and truth.json into `dir`.
void write_scene(const std::filesystem::path& dir, const Scene& scene, const SceneConfig& config);

}  // namespace mavdet
