#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mavdet/appearance.hpp"
#include "mavdet/motion_classifier.hpp"
#include "mavdet/motion_compensation.hpp"
#include "mavdet/segmentation.hpp"
#include "mavdet/tracking.hpp"

namespace mavdet {

enum class DetectorMode { global, local };
enum class Outcome { success, failure };

const char* to_string(DetectorMode m);

/// Global stays global until something is found; local persists through
/// failures until `consecutive_local_failures` (failures before this frame)
/// reaches `bailout`.
DetectorMode switch_mode(DetectorMode mode, Outcome outcome, int consecutive_local_failures, int bailout = 30);

struct PipelineConfig {
  DetectorConfig detector;
  SegmentationConfig segmentation;
  MotionClassifierConfig motion_classifier;
  /// Motion compensation for the full-frame motion module.
  MotionCompensationParams global_compensation;
  /// Motion compensation inside the local search region. The region is small,
  /// so a coarser grid still samples it more densely than the full frame.
  MotionCompensationParams local_compensation{12, 12, {}, {}};
  /// Camera motion around the last target, feeding the region prediction.
  MotionCompensationParams camera_motion{8, 8, {}, {}};
  bool estimate_camera_motion = true;

  double kalman_q = 0.01;
  double kalman_r = 1.0;
  double kalman_p0 = 10.0;
  double region_base = 300.0;
  double region_growth = 4.0;
  int lost_limit = 30;
  double select_radius_factor = 1.5;

  void validate() const;
  KalmanModeld kalman_model() const { return KalmanModeld::make(1.0, kalman_q, kalman_r, kalman_p0); }
};

struct FrameResult {
  int frame{0};
  std::optional<Detection> detection;
  DetectorMode mode_before{DetectorMode::global};
  DetectorMode mode_after{DetectorMode::global};
  std::optional<Box> region;
  std::optional<Point2d> predicted_center;
  /// Detection modules in execution order.
  std::vector<Source> modules_run;
  /// Milliseconds per stage: GAD, GMD, LAD, LMD, track.
  std::map<std::string, double> latency_ms;
  double total_ms{0};
  int motion_candidates{0};
  bool homography_fallback{false};
  bool degraded{false};
};

struct MotionDetection {
  std::vector<Detection> detections;  ///< full-frame boxes that passed both classifiers
  std::vector<Box> candidates;        ///< every segmented box, full-frame
  Alignment alignment;
};

/// Motion-based detection on the `roi` crop of an ordered gray pair:
/// compensation, segmentation, motion classifier, then patch classifier.
MotionDetection detect_motion(const GrayImage& prev, const GrayImage& cur, const Frame& cur_frame,
                              const PixelRect& roi, const MotionCompensationParams& compensation,
                              const SegmentationConfig& segmentation, const MotionClassifierConfig& motion,
                              PatchClassifier& classifier, Source source);

/// Global/local detector with the adaptive search region. Frames must be fed
/// in order; the previous frame is passed alongside each current frame.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, AppearanceDetector& detector, PatchClassifier& classifier);

  FrameResult process_frame(const Frame* prev, const Frame& cur);

  DetectorMode mode() const { return mode_; }
  bool tracking() const { return tracking_; }
  const TrackStated& track() const { return track_; }
  int consecutive_local_failures() const { return local_failures_; }
  const PipelineConfig& config() const { return config_; }
  void reset();

 private:
  const GrayImage& gray_of(const Frame& frame, GrayImage& storage) const;

  PipelineConfig config_;
  KalmanModeld model_;
  AppearanceDetector& detector_;
  PatchClassifier& classifier_;

  DetectorMode mode_{DetectorMode::global};
  bool tracking_{false};
  TrackStated track_;
  int local_failures_{0};

  int cached_index_{-1};
  GrayImage cached_gray_;
};

}  // namespace mavdet
