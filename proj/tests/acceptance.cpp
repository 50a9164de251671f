// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mavdet/evaluation.hpp"
#include "mavdet/motion_classifier.hpp"
#include "mavdet/motion_compensation.hpp"
#include "mavdet/pipeline.hpp"
#include "mavdet/synthetic.hpp"
#include "mavdet/tracking.hpp"

using namespace mavdet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Verdict homography_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1, 1);
  const BackgroundType textures[] = {BackgroundType::noise, BackgroundType::checker, BackgroundType::structures};
  double total_error = 0, worst = 0;
  int failures = 0;
  const int pairs = 50;
  for (int i = 0; i < pairs; ++i) {
    SceneConfig c;
    c.frames = 2;
    c.width = 1920;
    c.height = 1080;
    c.seed = 1000 + i;
    c.background = textures[i % 3];
    c.target.reset();
    const double t = 20 * std::sqrt(0.5 * (1 + u(rng)));
    const double dir = u(rng) * std::numbers::pi;
    c.camera = {t * std::cos(dir), t * std::sin(dir), 2.0 * u(rng), 0.01 * u(rng), 5e-6 * u(rng), 5e-6 * u(rng)};
    const Scene s = generate(c);
    const GrayImage a = to_grayscale(s.frames[0].rgb), b = to_grayscale(s.frames[1].rgb);

    MotionCompensationParams p;
    auto matches = track_keypoints(a, b, sample_grid_keypoints(c.width, c.height, p.grid_cols, p.grid_rows), p.lk);
    // Replace a tenth of the tracked matches with random correspondences.
    std::vector<std::size_t> tracked;
    for (std::size_t k = 0; k < matches.size(); ++k)
      if (matches[k].tracked) tracked.push_back(k);
    std::shuffle(tracked.begin(), tracked.end(), rng);
    std::uniform_real_distribution<double> px(0, c.width), py(0, c.height);
    for (std::size_t k = 0; k < tracked.size() / 10; ++k) matches[tracked[k]].cur = Point2d(px(rng), py(rng));
    try {
      const auto fit = estimate_homography(matches, p.ransac);
      const double e = mean_corner_error(fit.transform, s.truth.homographies[1], c.width, c.height);
      total_error += e;
      worst = std::max(worst, e);
    } catch (const Error&) {
      ++failures;
    }
  }
  const double secs = seconds_since(t0);
  const double mean = pairs > failures ? total_error / (pairs - failures) : 1e9;
  return {failures == 0 && mean < 0.5 && secs < 60,
          fmt("mean corner error %.4f px (worst %.4f) over %d 1920x1080 pairs, %d failures, %.1f s", mean, worst, pairs,
              failures, secs)};
}

SceneConfig motion_scene(std::uint64_t seed, const char* preset = "pan") {
  SceneConfig c = scene_preset(preset);
  c.seed = seed;
  c.frames = 100;
  return c;
}

Verdict motion_path() {
  PipelineConfig cfg;
  MatchCounts total;
  int frames = 0;
  const char* presets[] = {"pan", "pan", "orbit", "tilt", "checker", "structures"};
  for (int i = 0; i < 6; ++i) {
    const SceneConfig c = motion_scene(200 + i, presets[i]);
    const Scene s = generate(c);
    OracleClassifier cls(ground_truth(s.truth));
    GrayImage prev = to_grayscale(s.frames[0].rgb);
    for (int n = 1; n < c.frames; ++n) {
      GrayImage cur = to_grayscale(s.frames[n].rgb);
      const auto m = detect_motion(prev, cur, s.frames[n], {0, 0, c.width, c.height}, cfg.global_compensation,
                                   cfg.segmentation, cfg.motion_classifier, cls, Source::gmd);
      const std::vector<Box> gts{*s.truth.boxes[n]};
      total += match_frame(m.detections, gts).counts;
      prev = std::move(cur);
      ++frames;
    }
  }
  const auto mt = metrics_from_counts(total);
  return {frames >= 500 && mt.precision >= 0.9 && mt.recall >= 0.9,
          fmt("motion-only precision %.3f recall %.3f over %d frames (tp %d fp %d fn %d)", mt.precision, mt.recall,
              frames, total.tp, total.fp, total.fn)};
}

Verdict brightness() {
  PipelineConfig cfg;
  PassThroughClassifier cls;
  int frames = 0, dirty = 0, max_offset = 0;
  for (const char* preset : {"brightness", "static"}) {
    for (std::uint64_t seed : {1u, 2u}) {
      SceneConfig c = scene_preset(preset);
      c.seed = 300 + seed;
      c.frames = 60;
      c.target.reset();
      c.brightness_max_step = 80;
      const Scene s = generate(c);
      for (int b : s.truth.brightness) max_offset = std::max(max_offset, std::abs(b));
      GrayImage prev = to_grayscale(s.frames[0].rgb);
      for (int n = 1; n < c.frames; ++n) {
        GrayImage cur = to_grayscale(s.frames[n].rgb);
        const auto m = detect_motion(prev, cur, s.frames[n], {0, 0, c.width, c.height}, cfg.global_compensation,
                                     cfg.segmentation, cfg.motion_classifier, cls, Source::gmd);
        dirty += !m.candidates.empty();
        ++frames;
        prev = std::move(cur);
      }
    }
  }
  return {dirty == 0 && max_offset <= 40 && cfg.segmentation.alpha == 1.0,
          fmt("%d of %d drifting frames produced candidates (offsets up to %d)", dirty, frames, max_offset)};
}

Verdict motion_statistics() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-6, 6);
  double worst = 0;
  for (int set = 0; set < 1000; ++set) {
    MotionVectors<double> v;
    const int n = 1 + int(rng() % 80);
    for (int i = 0; i < n; ++i) v.vectors.emplace_back(u(rng), u(rng));
    // Reference: long double raw moments accumulated in reverse.
    long double sa = 0, sa2 = 0, sm = 0, sm2 = 0;
    for (auto it = v.vectors.rbegin(); it != v.vectors.rend(); ++it) {
      const long double a = std::atan2((long double)it->y(), (long double)it->x());
      const long double m = std::hypot((long double)it->x(), (long double)it->y());
      sa += a, sa2 += a * a, sm += m, sm2 += m * m;
    }
    const long double f = sa2 / n - (sa / n) * (sa / n), g = sm2 / n - (sm / n) * (sm / n), lambda = sm / n;
    const auto mf = motion_features(v);
    worst = std::max({worst, std::abs(mf.angle_variance - double(f)), std::abs(mf.velocity_variance - double(g)),
                      std::abs(mf.mean_speed - double(lambda))});
  }
  int grid = 0, mismatches = 0;
  for (double f : {0.0, 0.5, 0.79, 0.8, 0.81, 1.2, 3.0})
    for (double g : {0.0, 0.5, 0.79, 0.8, 0.81, 1.2, 3.0})
      for (double l : {0.0, 0.5, 0.99, 1.0, 1.01, 2.0, 8.0}) {
        const bool expected = !(f > 0.8 || g > 0.8 || l < 1.0);
        mismatches += (classify_motion(MotionFeatures<double>{f, g, l}, 0.8, 0.8, 1.0) == MotionLabel::candidate) !=
                      expected;
        ++grid;
      }
  return {worst <= 1e-9 && mismatches == 0,
          fmt("max statistic deviation %.2e over 1000 sets; %d/%d truth-table cells wrong", worst, mismatches, grid)};
}

Verdict kalman() {
  const auto m0 = KalmanModeld::make(1, 1e-12, 1, 10);
  TrackStated s;
  for (int k = 0; k < 50; ++k) s = kf_update(kf_predict(s, m0).state, m0, Point2d(5, 0));
  const double conv = (s.velocity() - Point2d(5, 0)).norm();

  const auto m = KalmanModeld::make();
  bool exact = true;
  TrackStated miss;
  miss.x << 2.5, -1.25, 0.5, 0.125;
  miss.has_velocity = true;
  const Eigen::Vector4d x0 = miss.x;
  Eigen::Matrix4d mk = Eigen::Matrix4d::Identity();
  for (int k = 1; k <= 60; ++k) {
    miss = kf_update(kf_predict(miss, m).state, m, std::nullopt);
    mk = m.transition * mk;
    exact = exact && miss.x == mk * x0 && miss.lost == k;
  }

  std::mt19937_64 rng(7);
  std::bernoulli_distribution hit(0.6);
  std::normal_distribution<double> z(0, 8);
  double asym = 0, min_eig = 1e300;
  for (int seq = 0; seq < 10000; ++seq) {
    TrackStated t;
    const int len = 1 + int(rng() % 40);
    for (int i = 0; i < len; ++i) {
      t = kf_update(kf_predict(t, m).state, m, hit(rng) ? std::optional<Point2d>(Point2d(z(rng), z(rng))) : std::nullopt);
      asym = std::max(asym, (t.P - t.P.transpose()).cwiseAbs().maxCoeff());
    }
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(t.P).eigenvalues().minCoeff());
  }
  return {conv < 1e-3 && exact && asym <= 1e-9 && min_eig >= -1e-9,
          fmt("velocity error %.2e after 50 frames; miss sequences %s; max asymmetry %.1e, min eigenvalue %.3g over "
              "10000 sequences",
              conv, exact ? "exact" : "inexact", asym, min_eig)};
}

class FirstFrameOnly final : public AppearanceDetector {
 public:
  explicit FirstFrameOnly(GroundTruth gt) : oracle_(std::move(gt)) {}

 protected:
  std::vector<Detection> run(const Frame& f, const PixelRect& roi) override {
    return f.index == 0 ? oracle_.detect(f, roi, 0.0) : std::vector<Detection>{};
  }

 private:
  OracleDetector oracle_;
};

Verdict switcher() {
  int wrong = 0;
  for (int k = 0; k <= 60; ++k) {
    wrong += switch_mode(DetectorMode::global, Outcome::success, k) != DetectorMode::local;
    wrong += switch_mode(DetectorMode::global, Outcome::failure, k) != DetectorMode::global;
    wrong += switch_mode(DetectorMode::local, Outcome::success, k) != DetectorMode::local;
    wrong += switch_mode(DetectorMode::local, Outcome::failure, k) != (k < 30 ? DetectorMode::local : DetectorMode::global);
  }
  SceneConfig c = scene_preset("static");
  c.frames = 40;
  const Scene s = generate(c);
  FirstFrameOnly det(ground_truth(s.truth));
  PassThroughClassifier cls;
  PipelineConfig cfg;
  cfg.segmentation.min_area = 1 << 30;  // silence the motion path too
  Pipeline p(cfg, det, cls);
  int back_to_global = -1;
  for (int n = 0; n < c.frames; ++n) {
    const auto r = p.process_frame(n ? &s.frames[n - 1] : nullptr, s.frames[n]);
    if (n > 0 && r.mode_before == DetectorMode::local && r.mode_after == DetectorMode::global) {
      back_to_global = n;
      break;
    }
  }
  return {wrong == 0 && back_to_global == 31,
          fmt("%d table mismatches over counters 0..60; back to global on miss %d (expected 31)", wrong,
              back_to_global)};
}

Verdict search_region_check() {
  const bool sides = search_region_side(0) == 300 && search_region_side(10) == 340 && search_region_side(30) == 420;
  std::mt19937_64 rng(5);
  int out_of_bounds = 0, wrong_side = 0;
  for (int i = 0; i < 100000; ++i) {
    const int w = 64 + int(rng() % 4000), h = 64 + int(rng() % 3000), lost = int(rng() % 200);
    std::uniform_real_distribution<double> cx(-0.5 * w, 1.5 * w), cy(-0.5 * h, 1.5 * h);
    const Box b = search_region(Point2d(cx(rng), cy(rng)), lost, w, h);
    out_of_bounds += b.x < 0 || b.y < 0 || b.right() > w || b.bottom() > h;
    wrong_side += b.w != b.h || b.w != std::min<double>(300 + 4 * lost, std::min(w, h));
  }
  return {sides && out_of_bounds == 0 && wrong_side == 0,
          fmt("sides %g/%g/%g; %d out of bounds and %d wrong sizes over 100000 random centers", search_region_side(0),
              search_region_side(10), search_region_side(30), out_of_bounds, wrong_side)};
}

int oracle_tp(std::vector<Detection> preds, const std::vector<Box>& gts) {
  std::stable_sort(preds.begin(), preds.end(),
                   [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
  std::vector<bool> used(gts.size(), false);
  int tp = 0;
  for (const auto& p : preds) {
    int best = -1;
    double best_iou = 0.5;
    for (std::size_t g = 0; g < gts.size(); ++g)
      if (!used[g] && iou(p.box, gts[g]) > best_iou) best_iou = iou(p.box, gts[g]), best = int(g);
    if (best >= 0) used[std::size_t(best)] = true, ++tp;
  }
  return tp;
}

double oracle_ap(const std::vector<FrameRecord>& frames) {
  std::set<double> scores;
  int n_gt = 0;
  for (const auto& f : frames) {
    n_gt += int(f.gts.size());
    for (const auto& p : f.preds) scores.insert(p.confidence);
  }
  double best[11] = {};
  for (double s : scores) {
    int tp = 0, kept = 0;
    for (const auto& f : frames) {
      std::vector<Detection> sub;
      for (const auto& p : f.preds)
        if (p.confidence >= s) sub.push_back(p);
      kept += int(sub.size());
      tp += oracle_tp(sub, f.gts);
    }
    for (int level = 0; level <= 10; ++level)
      if (10 * tp >= level * n_gt) best[level] = std::max(best[level], double(tp) / kept);
  }
  double sum = 0;
  for (double b : best) sum += b;
  return sum / 11;
}

Verdict evaluation_check() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(0, 60), jit(-6, 6), conf(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<FrameRecord> frames(1 + rng() % 4);
    int np = 0, ng = 0;
    for (auto& f : frames) {
      for (int g = int(rng() % 5); g > 0 && ng < 20; --g, ++ng) f.gts.push_back({pos(rng), pos(rng), 10, 10});
      for (int p = int(rng() % 7); p > 0 && np < 20; --p, ++np) {
        Box b{pos(rng), pos(rng), 10, 10};
        if (!f.gts.empty() && rng() % 3) {
          b = f.gts[rng() % f.gts.size()];
          b.x += jit(rng), b.y += jit(rng);
        }
        f.preds.push_back({b, rng() % 2 ? std::round(conf(rng) * 5) / 5 : conf(rng), Source::gad});
      }
    }
    if (ng == 0) frames[0].gts.push_back({5, 5, 10, 10});
    worst = std::max(worst, std::abs(average_precision_11pt(frames) - oracle_ap(frames)));
  }
  std::vector<FrameRecord> perfect(20);
  for (int i = 0; i < 20; ++i) {
    perfect[i].gts = {{3.0 * i, 2, 9, 9}};
    perfect[i].preds = {{perfect[i].gts[0], 1.0, Source::gad}};
  }
  const auto r = evaluate(perfect).overall;
  const bool ones = r.precision == 1 && r.recall == 1 && r.fscore == 1 && r.ap == 1;
  return {worst <= 1e-12 && ones,
          fmt("max AP deviation %.1e over 200 instances; perfect predictor P=%g R=%g F=%g AP=%g", worst, r.precision,
              r.recall, r.fscore, r.ap)};
}

struct FusionStats {
  int gt = 0, recovered = 0, frames = 0, motion_hits = 0, appearance_frames = 0, appearance_with_motion_latency = 0;
};

FusionStats run_fusion() {
  FusionStats st;
  for (std::uint64_t seed : {11u, 12u}) {
    SceneConfig c = scene_preset("pan");
    c.seed = seed;
    c.frames = 100;
    const Scene s = generate(c);
    const GroundTruth gt = ground_truth(s.truth);
    OracleDetector det(gt, {.dropout = 0.3, .seed = seed});
    OracleClassifier cls(gt);
    Pipeline p({}, det, cls);
    for (int n = 0; n < c.frames; ++n) {
      const auto r = p.process_frame(n ? &s.frames[n - 1] : nullptr, s.frames[n]);
      ++st.frames;
      ++st.gt;
      if (r.detection && iou(r.detection->box, *s.truth.boxes[n]) > 0.5) ++st.recovered;
      if (r.detection && is_motion(r.detection->source)) ++st.motion_hits;
      if (r.detection && !is_motion(r.detection->source)) {
        ++st.appearance_frames;
        const bool motion_ran = r.latency_ms.count("GMD") || r.latency_ms.count("LMD") ||
                                std::any_of(r.modules_run.begin(), r.modules_run.end(), is_motion);
        st.appearance_with_motion_latency += motion_ran;
      }
    }
  }
  return st;
}

Verdict full_pipeline(const FusionStats& st) {
  const double recall = double(st.recovered) / st.gt;
  return {recall >= 0.95, fmt("recall %.3f over %d frames with 30%% appearance dropout (%d rescued by motion)", recall,
                              st.frames, st.motion_hits)};
}

Verdict latency(const FusionStats& st) {
  PipelineConfig cfg;
  PassThroughClassifier cls;
  std::vector<double> gmd, lmd;
  for (int chunk = 0; chunk < 8; ++chunk) {
    SceneConfig c = scene_preset("hd");
    c.seed = 500 + chunk;
    c.frames = 26;
    const Scene s = generate(c);
    GrayImage prev = to_grayscale(s.frames[0].rgb);
    for (int n = 1; n < c.frames; ++n) {
      GrayImage cur = to_grayscale(s.frames[n].rgb);
      auto t0 = Clock::now();
      detect_motion(prev, cur, s.frames[n], {0, 0, c.width, c.height}, cfg.global_compensation, cfg.segmentation,
                    cfg.motion_classifier, cls, Source::gmd);
      gmd.push_back(1000 * seconds_since(t0));
      const Box region = search_region(*s.truth.centers[n], 0, c.width, c.height);
      t0 = Clock::now();
      detect_motion(prev, cur, s.frames[n], to_pixel_rect(region), cfg.local_compensation, cfg.segmentation,
                    cfg.motion_classifier, cls, Source::lmd);
      lmd.push_back(1000 * seconds_since(t0));
      prev = std::move(cur);
    }
  }
  const double g = median(gmd), l = median(lmd);
  return {l < g / 4 && st.appearance_with_motion_latency == 0,
          fmt("median LMD %.2f ms on 300x300 vs GMD %.2f ms on 1920x1080 (ratio %.3f) over %zu frames; %d of %d "
              "appearance frames ran a motion module",
              l, g, l / g, gmd.size(), st.appearance_with_motion_latency, st.appearance_frames)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](const char* name, const std::function<Verdict()>& f) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  };
  report("homography-oracle", homography_oracle);
  report("motion-path", motion_path);
  report("brightness-robustness", brightness);
  report("motion-statistics", motion_statistics);
  report("kalman", kalman);
  report("switcher", switcher);
  report("search-region", search_region_check);
  report("evaluation", evaluation_check);
  FusionStats fusion;
  report("full-pipeline", [&] {
    fusion = run_fusion();
    return full_pipeline(fusion);
  });
  report("latency-shape", [&] { return latency(fusion); });
  return failed ? 1 : 0;
}
