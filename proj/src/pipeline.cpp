#include "mavdet/pipeline.hpp"

#include <chrono>

#include "mavdet/error.hpp"

namespace mavdet {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

bool covers(const PixelRect& r, const GrayImage& img) {
  return r.x == 0 && r.y == 0 && r.w == img.width() && r.h == img.height();
}

}  // namespace

const char* to_string(DetectorMode m) { return m == DetectorMode::global ? "global" : "local"; }

DetectorMode switch_mode(DetectorMode mode, Outcome outcome, int consecutive_local_failures, int bailout) {
  if (outcome == Outcome::success) return DetectorMode::local;
  if (mode == DetectorMode::global) return DetectorMode::global;
  return consecutive_local_failures < bailout ? DetectorMode::local : DetectorMode::global;
}

void PipelineConfig::validate() const {
  detector.validate();
  segmentation.validate();
  if (lost_limit < 0) throw Error(ErrorCode::invalid_config, "lost limit must be >= 0");
  if (!(region_base > 0) || !(region_growth >= 0))
    throw Error(ErrorCode::invalid_config, "search region base must be > 0 and growth >= 0");
  if (!(kalman_q > 0) || !(kalman_r > 0) || !(kalman_p0 > 0))
    throw Error(ErrorCode::invalid_config, "Kalman covariances must be positive");
  if (!(select_radius_factor > 0)) throw Error(ErrorCode::invalid_config, "selection radius must be > 0");
}

MotionDetection detect_motion(const GrayImage& prev, const GrayImage& cur, const Frame& cur_frame,
                              const PixelRect& roi, const MotionCompensationParams& compensation,
                              const SegmentationConfig& segmentation, const MotionClassifierConfig& motion,
                              PatchClassifier& classifier, Source source) {
  if (!prev.same_shape(cur)) throw Error(ErrorCode::dimension_mismatch, "frame pair differs in size");
  GrayImage prev_store, cur_store;
  const bool full = covers(roi, cur);
  const GrayImage& p = full ? prev : (prev_store = crop(prev, roi));
  const GrayImage& c = full ? cur : (cur_store = crop(cur, roi));

  MotionDetection out;
  out.alignment = align_frames(p, c, compensation);
  WarpedImage warped = warp_frame(p, out.alignment.transform);
  const DiffImage diff = frame_difference(c, warped);
  const double light = light_intensity_term(c, p);
  const BinaryMask mask = binarize(diff, segmentation, light, out.alignment.background_motion);
  const std::vector<Box> boxes = extract_candidates(mask, segmentation);
  if (boxes.empty()) return out;

  // Outside the valid warp the current frame stands in, so those pixels read
  // as static instead of as a hard edge against zero.
  GrayImage& aligned = warped.image;
  for (int y = 0; y < aligned.height(); ++y)
    for (int x = 0; x < aligned.width(); ++x)
      if (!warped.valid(x, y)) aligned(x, y) = c(x, y);

  for (const Box& box : boxes) {
    const Box global = box.translated(roi.x, roi.y);
    out.candidates.push_back(global);
    if (classify_candidate(aligned, c, box, motion) == MotionLabel::noise) continue;
    const PatchVerdict verdict = classifier.classify(make_patch(cur_frame, global));
    if (verdict.label != PatchLabel::mav) continue;
    out.detections.push_back({global, verdict.score, source});
  }
  return out;
}

Pipeline::Pipeline(PipelineConfig config, AppearanceDetector& detector, PatchClassifier& classifier)
    : config_(std::move(config)), detector_(detector), classifier_(classifier) {
  config_.validate();
  model_ = config_.kalman_model();
}

void Pipeline::reset() {
  mode_ = DetectorMode::global;
  tracking_ = false;
  track_ = {};
  local_failures_ = 0;
  cached_index_ = -1;
  cached_gray_ = {};
}

const GrayImage& Pipeline::gray_of(const Frame& frame, GrayImage& storage) const {
  if (frame.index == cached_index_ && cached_gray_.width() == frame.width() &&
      cached_gray_.height() == frame.height())
    return cached_gray_;
  storage = to_grayscale(frame);
  return storage;
}

FrameResult Pipeline::process_frame(const Frame* prev, const Frame& cur) {
  const auto t_frame = Clock::now();
  if (cur.width() <= 0 || cur.height() <= 0) throw Error(ErrorCode::invalid_dimensions, "empty frame");
  if (prev && (prev->width() != cur.width() || prev->height() != cur.height()))
    throw Error(ErrorCode::dimension_mismatch, "consecutive frames differ in size");

  FrameResult r;
  r.frame = cur.index;
  r.mode_before = mode_;
  GrayImage cur_gray = to_grayscale(cur);
  GrayImage prev_store;
  const GrayImage* prev_gray = prev ? &gray_of(*prev, prev_store) : nullptr;
  const int width = cur.width(), height = cur.height();

  const auto run_motion = [&](const PixelRect& roi, const MotionCompensationParams& params, Source source) {
    const auto t = Clock::now();
    r.modules_run.push_back(source);
    MotionDetection md = detect_motion(*prev_gray, cur_gray, cur, roi, params, config_.segmentation,
                                       config_.motion_classifier, classifier_, source);
    r.latency_ms[to_string(source)] = elapsed_ms(t);
    r.motion_candidates += static_cast<int>(md.candidates.size());
    r.homography_fallback = r.homography_fallback || md.alignment.fallback;
    return md.detections;
  };

  if (mode_ == DetectorMode::global) {
    const auto t = Clock::now();
    r.modules_run.push_back(Source::gad);
    std::vector<Detection> dets = detector_.detect(cur, config_.detector.t0);
    for (Detection& d : dets) d.source = Source::gad;
    r.latency_ms["GAD"] = elapsed_ms(t);
    r.detection = select_target(dets, std::nullopt, std::nullopt, config_.select_radius_factor);
    if (!r.detection && prev_gray) {
      const std::vector<Detection> found =
          run_motion({0, 0, width, height}, config_.global_compensation, Source::gmd);
      r.detection = select_target(found, std::nullopt, std::nullopt, config_.select_radius_factor);
    }
    if (r.detection) {
      track_ = {};
      track_.P = model_.initial_covariance;
      track_.last_center = r.detection->box.center();
      track_.last_box = r.detection->box;
      tracking_ = true;
      local_failures_ = 0;
    }
    mode_ = switch_mode(DetectorMode::global, r.detection ? Outcome::success : Outcome::failure, 0,
                        config_.lost_limit);
  } else {
    Homographyd camera = Homographyd::identity();
    if (prev_gray && config_.estimate_camera_motion) {
      const auto t = Clock::now();
      const Box window = search_region(track_.last_center, 0, width, height, config_.region_base, 0.0);
      const PixelRect wr = to_pixel_rect(window);
      const Alignment a = align_frames(crop(*prev_gray, wr), crop(cur_gray, wr), config_.camera_motion);
      if (!a.fallback) camera = a.transform.from_local(Point2d(wr.x, wr.y));
      r.latency_ms["track"] = elapsed_ms(t);
    }
    const KalmanPrediction<double> pred = kf_predict(track_, model_);
    const Point2d center = predict_center(track_.last_center, camera, pred.measurement);
    const Box region = search_region(center, track_.lost, width, height, config_.region_base,
                                     config_.region_growth);
    const PixelRect roi = to_pixel_rect(region);
    r.region = to_box(roi);
    r.predicted_center = center;

    const auto t = Clock::now();
    r.modules_run.push_back(Source::lad);
    std::vector<Detection> dets = detector_.detect(cur, roi, config_.detector.t1);
    for (Detection& d : dets) d = translated(d, roi.x, roi.y), d.source = Source::lad;
    r.latency_ms["LAD"] = elapsed_ms(t);
    r.detection = select_target(dets, center, track_.last_box, config_.select_radius_factor);
    if (!r.detection && prev_gray) {
      const std::vector<Detection> found = run_motion(roi, config_.local_compensation, Source::lmd);
      r.detection = select_target(found, center, track_.last_box, config_.select_radius_factor);
    }

    std::optional<Point2d> z;
    if (r.detection) z = measure_velocity(track_.last_center, r.detection->box.center(), camera);
    track_ = kf_update(pred.state, model_, z);
    if (r.detection) {
      track_.last_center = r.detection->box.center();
      track_.last_box = r.detection->box;
    } else {
      track_.last_center = center;
    }

    const Outcome outcome = r.detection ? Outcome::success : Outcome::failure;
    mode_ = switch_mode(DetectorMode::local, outcome, local_failures_, config_.lost_limit);
    local_failures_ = outcome == Outcome::success ? 0 : local_failures_ + 1;
    if (mode_ == DetectorMode::global) {
      tracking_ = false;
      local_failures_ = 0;
    }
  }

  r.mode_after = mode_;
  r.degraded = detector_.degraded() || classifier_.degraded();
  cached_gray_ = std::move(cur_gray);
  cached_index_ = cur.index;
  r.total_ms = elapsed_ms(t_frame);
  return r;
}

}  // namespace mavdet
