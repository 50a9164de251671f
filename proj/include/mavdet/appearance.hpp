#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mavdet/annotations.hpp"
#include "mavdet/geometry.hpp"
#include "mavdet/image.hpp"

namespace mavdet {

/// Producing module: global/local, appearance/motion.
enum class Source { gad, gmd, lad, lmd };

const char* to_string(Source s);
std::optional<Source> parse_source(const std::string& s);
inline bool is_motion(Source s) { return s == Source::gmd || s == Source::lmd; }

struct Detection {
  Box box;
  double confidence{0};
  Source source{Source::gad};
};

inline Detection translated(Detection d, double dx, double dy) {
  d.box = d.box.translated(dx, dy);
  return d;
}

struct DetectorConfig {
  double t0 = 0.5;  ///< global confidence threshold
  double t1 = 0.1;  ///< local confidence threshold
  void validate() const;
};

/// Appearance detector backend. Boxes come back in `roi`-local coordinates;
/// the caller translates them to the full frame.
class AppearanceDetector {
 public:
  virtual ~AppearanceDetector() = default;

  /// Never returns a detection below `threshold`; boxes are clipped to the roi.
  std::vector<Detection> detect(const Frame& frame, const PixelRect& roi, double threshold);
  std::vector<Detection> detect(const Frame& frame, double threshold) {
    return detect(frame, {0, 0, frame.width(), frame.height()}, threshold);
  }

  /// True once the backend failed and is being treated as silent.
  virtual bool degraded() const { return false; }

 protected:
  virtual std::vector<Detection> run(const Frame& frame, const PixelRect& roi) = 0;
};

/// Detector that never fires; used for motion-only configurations.
class NullDetector final : public AppearanceDetector {
 protected:
  std::vector<Detection> run(const Frame&, const PixelRect&) override { return {}; }
};

struct OracleDetectorOptions {
  double dropout = 0.0;       ///< probability a frame yields nothing
  double jitter_sigma = 0.0;  ///< px, Gaussian jitter of the box center
  double confidence = 1.0;
  double confidence_spread = 0.0;  ///< uniform +- spread around `confidence`
  int false_positives = 0;         ///< random boxes per call
  double false_positive_confidence = 0.3;
  std::uint64_t seed = 0;
};

/// Answers from ground truth. Deterministic for a fixed seed and frame index.
class OracleDetector final : public AppearanceDetector {
 public:
  OracleDetector(GroundTruth truth, OracleDetectorOptions options = {});

 protected:
  std::vector<Detection> run(const Frame& frame, const PixelRect& roi) override;

 private:
  GroundTruth truth_;
  OracleDetectorOptions options_;
};

inline constexpr int kPatchSize = 32;

/// Candidate resampled to 32x32 RGB, with its provenance.
struct Patch {
  int frame_index{0};
  Box source_box;
  RgbImage pixels;
};

Patch make_patch(const Frame& frame, const Box& box);

enum class PatchLabel { mav, clutter };

struct PatchVerdict {
  PatchLabel label{PatchLabel::mav};
  double score{1.0};
};

class PatchClassifier {
 public:
  virtual ~PatchClassifier() = default;
  virtual PatchVerdict classify(const Patch& patch) = 0;
  virtual bool degraded() const { return false; }
};

/// Always mav with score 1.
class PassThroughClassifier final : public PatchClassifier {
 public:
  PatchVerdict classify(const Patch&) override { return {PatchLabel::mav, 1.0}; }
};

/// mav iff the patch's source box overlaps a ground-truth box with IOU above
/// the threshold.
class OracleClassifier final : public PatchClassifier {
 public:
  explicit OracleClassifier(GroundTruth truth, double iou_threshold = 0.5);
  PatchVerdict classify(const Patch& patch) override;

 private:
  GroundTruth truth_;
  double iou_threshold_;
};

/// Picks the detection closest to `predicted_center` among those within
/// radius_factor * max(last_box.w, last_box.h); otherwise the most confident.
/// Ties go to higher confidence, then smaller area.
std::optional<Detection> select_target(std::span<const Detection> dets,
                                       const std::optional<Point2d>& predicted_center,
                                       const std::optional<Box>& last_box, double radius_factor = 1.5);

/// SplitMix64 finalizer, used for per-frame deterministic draws.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace mavdet
