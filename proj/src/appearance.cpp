#include "mavdet/appearance.hpp"

#include <algorithm>
#include <random>
#include <tuple>

#include "mavdet/error.hpp"

namespace mavdet {

const char* to_string(Source s) {
  switch (s) {
    case Source::gad: return "GAD";
    case Source::gmd: return "GMD";
    case Source::lad: return "LAD";
    case Source::lmd: return "LMD";
  }
  return "?";
}

std::optional<Source> parse_source(const std::string& s) {
  for (Source v : {Source::gad, Source::gmd, Source::lad, Source::lmd})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

void DetectorConfig::validate() const {
  if (!(0 <= t1 && t1 <= t0 && t0 <= 1))
    throw Error(ErrorCode::invalid_config, "detector thresholds must satisfy 0 <= t1 <= t0 <= 1");
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Detection> AppearanceDetector::detect(const Frame& frame, const PixelRect& roi, double threshold) {
  const Box bounds{0, 0, double(roi.w), double(roi.h)};
  std::vector<Detection> out;
  for (Detection d : run(frame, roi)) {
    if (!(d.confidence >= threshold)) continue;
    d.confidence = std::clamp(d.confidence, 0.0, 1.0);
    d.box = intersect(d.box, bounds);
    if (!d.box.valid()) continue;
    out.push_back(d);
  }
  return out;
}

OracleDetector::OracleDetector(GroundTruth truth, OracleDetectorOptions options)
    : truth_(std::move(truth)), options_(options) {}

std::vector<Detection> OracleDetector::run(const Frame& frame, const PixelRect& roi) {
  std::mt19937_64 rng(mix_seed(options_.seed, static_cast<std::uint64_t>(frame.index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Detection> out;
  if (unit(rng) < options_.dropout) return out;

  const Box region = to_box(roi);
  const auto it = truth_.find(frame.index);
  if (it != truth_.end()) {
    for (const Box& gt : it->second) {
      Box b = gt;
      if (options_.jitter_sigma > 0) {
        b.x += options_.jitter_sigma * gauss(rng);
        b.y += options_.jitter_sigma * gauss(rng);
      }
      const Box clipped = intersect(b, region);
      if (!clipped.valid() || clipped.area() < 0.5 * b.area()) continue;
      double conf = options_.confidence;
      if (options_.confidence_spread > 0) conf += options_.confidence_spread * (2 * unit(rng) - 1);
      out.push_back({clipped.translated(-region.x, -region.y), std::clamp(conf, 0.0, 1.0), Source::gad});
    }
  }
  for (int i = 0; i < options_.false_positives; ++i) {
    const double side = 8 + 16 * unit(rng);
    const double x = unit(rng) * std::max(1.0, region.w - side);
    const double y = unit(rng) * std::max(1.0, region.h - side);
    out.push_back({{x, y, side, side}, options_.false_positive_confidence, Source::gad});
  }
  return out;
}

Patch make_patch(const Frame& frame, const Box& box) {
  return {frame.index, box, resample_bilinear(frame.rgb, box, kPatchSize, kPatchSize)};
}

OracleClassifier::OracleClassifier(GroundTruth truth, double iou_threshold)
    : truth_(std::move(truth)), iou_threshold_(iou_threshold) {}

PatchVerdict OracleClassifier::classify(const Patch& patch) {
  const auto it = truth_.find(patch.frame_index);
  if (it != truth_.end())
    for (const Box& gt : it->second)
      if (iou(patch.source_box, gt) > iou_threshold_) return {PatchLabel::mav, 1.0};
  return {PatchLabel::clutter, 1.0};
}

std::optional<Detection> select_target(std::span<const Detection> dets,
                                       const std::optional<Point2d>& predicted_center,
                                       const std::optional<Box>& last_box, double radius_factor) {
  if (dets.empty()) return std::nullopt;
  // Full lexicographic keys keep the choice independent of input order.
  auto tail_key = [](const Detection& d) {
    return std::make_tuple(-d.confidence, d.box.area(), d.box.x, d.box.y, d.box.w, d.box.h);
  };
  const Detection* best = nullptr;
  if (predicted_center && last_box) {
    const double radius = radius_factor * std::max(last_box->w, last_box->h);
    double best_dist = 0;
    for (const auto& d : dets) {
      const double dist = (d.box.center() - *predicted_center).norm();
      if (dist > radius) continue;
      if (!best || dist < best_dist || (dist == best_dist && tail_key(d) < tail_key(*best))) {
        best = &d;
        best_dist = dist;
      }
    }
    if (best) return *best;
  }
  for (const auto& d : dets)
    if (!best || tail_key(d) < tail_key(*best)) best = &d;
  return *best;
}

}  // namespace mavdet
