#include "mavdet/motion_classifier.hpp"

#include <algorithm>

namespace mavdet {
namespace {

PixelRect clip_rect(const PixelRect& r, int width, int height) {
  const int x0 = std::clamp(r.x, 0, width), y0 = std::clamp(r.y, 0, height);
  const int x1 = std::clamp(r.x + r.w, 0, width), y1 = std::clamp(r.y + r.h, 0, height);
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

std::vector<Point2d> detect_corners(const GrayImage& image, const PixelRect& region, int max_corners,
                                    double quality_level, double min_distance) {
  const PixelRect r = clip_rect(region, image.width(), image.height());
  if (r.w < 3 || r.h < 3 || max_corners <= 0) return {};
  const int w = image.width(), h = image.height();
  auto px = [&](int x, int y) {
    return float(image(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)));
  };

  // Sobel gradients over the region plus a one-pixel ring for the 3x3 block sum.
  const int gw = r.w + 2, gh = r.h + 2;
  std::vector<float> xx(static_cast<std::size_t>(gw * gh)), xy(xx.size()), yy(xx.size());
  for (int j = 0; j < gh; ++j)
    for (int i = 0; i < gw; ++i) {
      const int x = r.x + i - 1, y = r.y + j - 1;
      const float dx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1) - px(x - 1, y - 1) -
                        2 * px(x - 1, y) - px(x - 1, y + 1)) / 8.0f;
      const float dy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1) - px(x - 1, y - 1) -
                        2 * px(x, y - 1) - px(x + 1, y - 1)) / 8.0f;
      const std::size_t k = static_cast<std::size_t>(j * gw + i);
      xx[k] = dx * dx;
      xy[k] = dx * dy;
      yy[k] = dy * dy;
    }

  std::vector<float> response(static_cast<std::size_t>(r.w * r.h), 0.0f);
  float best = 0;
  for (int j = 0; j < r.h; ++j)
    for (int i = 0; i < r.w; ++i) {
      float a = 0, b = 0, c = 0;
      for (int dj = 0; dj < 3; ++dj)
        for (int di = 0; di < 3; ++di) {
          const std::size_t k = static_cast<std::size_t>((j + dj) * gw + (i + di));
          a += xx[k];
          b += xy[k];
          c += yy[k];
        }
      const float e = 0.5f * (a + c - std::sqrt((a - c) * (a - c) + 4 * b * b));
      response[static_cast<std::size_t>(j * r.w + i)] = e;
      best = std::max(best, e);
    }
  if (best <= 1e-6f) return {};

  const float floor = static_cast<float>(quality_level) * best;
  struct Cand {
    float score;
    int x, y;
  };
  std::vector<Cand> cands;
  for (int j = 0; j < r.h; ++j)
    for (int i = 0; i < r.w; ++i) {
      const float e = response[static_cast<std::size_t>(j * r.w + i)];
      if (e < floor || e <= 0) continue;
      bool peak = true;
      for (int dj = -1; dj <= 1 && peak; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int ii = i + di, jj = j + dj;
          if ((di || dj) && ii >= 0 && jj >= 0 && ii < r.w && jj < r.h &&
              response[static_cast<std::size_t>(jj * r.w + ii)] > e) {
            peak = false;
            break;
          }
        }
      if (peak) cands.push_back({e, r.x + i, r.y + j});
    }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.score > b.score; });

  std::vector<Point2d> corners;
  const double d2 = min_distance * min_distance;
  for (const auto& c : cands) {
    const Point2d p(c.x, c.y);
    const bool far = std::all_of(corners.begin(), corners.end(),
                                 [&](const Point2d& q) { return (p - q).squaredNorm() >= d2; });
    if (!far) continue;
    corners.push_back(p);
    if (static_cast<int>(corners.size()) >= max_corners) break;
  }
  return corners;
}

MotionVectors<double> extract_corner_flow(const GrayImage& prev, const GrayImage& cur, const Box& box,
                                          const MotionClassifierConfig& cfg) {
  if (!prev.same_shape(cur)) throw Error(ErrorCode::dimension_mismatch, "extract_corner_flow");
  PixelRect padded = to_pixel_rect(box);
  padded = {padded.x - cfg.box_padding, padded.y - cfg.box_padding, padded.w + 2 * cfg.box_padding,
            padded.h + 2 * cfg.box_padding};
  padded = clip_rect(padded, prev.width(), prev.height());
  MotionVectors<double> out;
  if (padded.w < 3 || padded.h < 3) return out;

  // Track inside a local crop so the pyramid cost follows the candidate size.
  const PixelRect context = clip_rect({padded.x - cfg.flow_margin, padded.y - cfg.flow_margin,
                                       padded.w + 2 * cfg.flow_margin, padded.h + 2 * cfg.flow_margin},
                                      prev.width(), prev.height());
  const GrayImage pc = crop(prev, context), cc = crop(cur, context);
  const PixelRect local{padded.x - context.x, padded.y - context.y, padded.w, padded.h};
  const auto corners = detect_corners(pc, local, cfg.max_corners, cfg.quality_level, cfg.min_distance);
  if (corners.empty()) return out;

  const ImagePyramid pp(pc, cfg.lk.levels), cp(cc, cfg.lk.levels);
  for (const auto& m : track_keypoints(pp, cp, corners, cfg.lk))
    if (m.tracked) out.vectors.push_back(m.cur - m.prev);
  return out;
}

MotionLabel classify_candidate(const GrayImage& prev, const GrayImage& cur, const Box& box,
                               const MotionClassifierConfig& cfg, MotionFeatures<double>* features) {
  const auto flow = extract_corner_flow(prev, cur, box, cfg);
  if (flow.vectors.empty()) {
    if (features) *features = {};
    return MotionLabel::noise;
  }
  const auto f = motion_features(flow);
  if (features) *features = f;
  return classify_motion(f, cfg.t3, cfg.t4, cfg.t5);
}

}  // namespace mavdet
