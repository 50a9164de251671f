#include <doctest.h>

#include <random>

#include "mavdet/error.hpp"
#include "mavdet/motion_compensation.hpp"
#include "support.hpp"

using namespace mavdet;
using mavdet::testing::textured_gray;

namespace {

GrayImage shifted(const GrayImage& src, int dx, int dy) {
  GrayImage out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) {
      const int sx = std::clamp(x - dx, 0, src.width() - 1), sy = std::clamp(y - dy, 0, src.height() - 1);
      out(x, y) = src(sx, sy);
    }
  return out;
}

std::vector<KeypointMatch> matches_under(const Homographyd& h, int n, std::mt19937_64& rng, double w = 640,
                                         double hgt = 480) {
  std::uniform_real_distribution<double> ux(0, w), uy(0, hgt);
  std::vector<KeypointMatch> m;
  for (int i = 0; i < n; ++i) {
    const Point2d p(ux(rng), uy(rng));
    m.push_back({p, h.apply(p), true});
  }
  return m;
}

Homographyd projective_truth() {
  Homographyd::Matrix m;
  m << 1.02, -0.03, 12.0, 0.025, 0.99, -7.5, 2e-5, -1.5e-5, 1;
  return Homographyd(m);
}

}  // namespace

TEST_CASE("grid keypoints at cell centers") {
  CHECK(sample_grid_keypoints(1920, 1080).size() == 600);
  const auto one = sample_grid_keypoints(641, 480, 1, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Point2d(320.5, 240));
  const auto four = sample_grid_keypoints(100, 100, 2, 2);
  CHECK(four == std::vector<Point2d>{{25, 25}, {75, 25}, {25, 75}, {75, 75}});
  CHECK_THROWS_AS(sample_grid_keypoints(10, 10, 0, 3), Error);
  CHECK_THROWS_AS(sample_grid_keypoints(10, 10, 11, 3), Error);
}

TEST_CASE("pyramid halves each level") {
  const ImagePyramid p(textured_gray(200, 120), 3);
  REQUIRE(p.levels() == 4);
  CHECK(p.level(1).width() == 100);
  CHECK(p.level(3).width() == 25);
  CHECK(p.level(3).height() == 15);
}

TEST_CASE("identical frames track with zero motion") {
  const GrayImage g = textured_gray(320, 240);
  const auto pts = sample_grid_keypoints(320, 240, 10, 8);
  const auto m = track_keypoints(g, g, pts);
  int tracked = 0;
  for (const auto& k : m)
    if (k.tracked) {
      ++tracked;
      CHECK((k.cur - k.prev).norm() < 0.1);
    }
  CHECK(tracked > 70);
}

TEST_CASE("a five pixel shift is recovered within a quarter pixel") {
  const GrayImage g = textured_gray(320, 240);
  const GrayImage s = shifted(g, 5, 0);
  const auto pts = sample_grid_keypoints(320, 240, 10, 8);
  int tracked = 0;
  for (const auto& k : track_keypoints(g, s, pts)) {
    if (!k.tracked) continue;
    ++tracked;
    // Points near the replicated left border see no real texture.
    if (k.prev.x() < 20) continue;
    CHECK((k.cur - k.prev - Point2d(5, 0)).norm() < 0.25);
  }
  CHECK(tracked > 60);
}

TEST_CASE("additive brightness change does not bias the flow") {
  const GrayImage g = textured_gray(320, 240);
  GrayImage s = shifted(g, 3, 2);
  for (auto& p : s.pixels()) p = static_cast<std::uint8_t>(std::min(255, p + 25));
  const auto pts = sample_grid_keypoints(320, 240, 10, 8);
  int tracked = 0;
  for (const auto& k : track_keypoints(g, s, pts)) {
    if (!k.tracked || k.prev.x() < 20 || k.prev.y() < 20) continue;
    ++tracked;
    CHECK((k.cur - k.prev - Point2d(3, 2)).norm() < 0.25);
  }
  CHECK(tracked > 50);
}

TEST_CASE("uniform images track nothing") {
  const GrayImage g(64, 64, 128);
  for (const auto& k : track_keypoints(g, g, sample_grid_keypoints(64, 64, 4, 4))) CHECK_FALSE(k.tracked);
}

TEST_CASE("mismatched images are rejected") {
  CHECK_THROWS_AS(track_keypoints(GrayImage(10, 10), GrayImage(11, 10), std::vector<Point2d>{{1, 1}}), Error);
}

TEST_CASE("no motion gives the identity") {
  std::mt19937_64 rng(1);
  const auto fit = estimate_homography(matches_under(Homographyd::identity(), 100, rng));
  CHECK((fit.transform.matrix() - Homographyd::Matrix::Identity()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(fit.inlier_count == 100);
}

TEST_CASE("pure translation is recovered") {
  std::mt19937_64 rng(2);
  const auto fit = estimate_homography(matches_under(Homographyd::translation(5, 0), 80, rng));
  CHECK((fit.transform.matrix() - Homographyd::translation(5, 0).matrix()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("exact on outlier-free correspondences of every transform class") {
  std::mt19937_64 rng(3);
  Homographyd::Matrix sim, aff;
  const double a = 0.1;
  sim << 1.1 * std::cos(a), -1.1 * std::sin(a), 4, 1.1 * std::sin(a), 1.1 * std::cos(a), -3, 0, 0, 1;
  aff << 1.05, 0.1, -6, -0.07, 0.93, 9, 0, 0, 1;
  for (const Homographyd& truth :
       {Homographyd::translation(-3.5, 7.25), Homographyd(sim), Homographyd(aff), projective_truth()}) {
    const auto fit = estimate_homography(matches_under(truth, 60, rng));
    CHECK(mean_corner_error(fit.transform, truth, 640, 480) < 1e-6);
  }
}

TEST_CASE("projective warp with ten percent outliers") {
  std::mt19937_64 rng(4);
  const Homographyd truth = projective_truth();
  auto m = matches_under(truth, 200, rng);
  std::uniform_real_distribution<double> ux(0, 640), uy(0, 480);
  for (int i = 0; i < 20; ++i) m[static_cast<std::size_t>(i * 10)].cur = {ux(rng), uy(rng)};
  const auto fit = estimate_homography(m);
  const Homographyd::Matrix diff = fit.transform.matrix() - truth.matrix();
  // Translation entries are in pixels; the linear block is dimensionless.
  CHECK(diff.block<2, 2>(0, 0).cwiseAbs().maxCoeff() < 1e-2);
  CHECK(std::abs(diff(0, 2)) < 1e-2);
  CHECK(std::abs(diff(1, 2)) < 1e-2);
  CHECK(diff.row(2).cwiseAbs().maxCoeff() < 1e-2);
  CHECK(fit.inlier_count >= 180);
  for (int i = 0; i < 20; ++i) CHECK_FALSE(fit.inliers[static_cast<std::size_t>(i * 10)]);
}

TEST_CASE("estimation failures") {
  std::mt19937_64 rng(5);
  auto few = matches_under(Homographyd::identity(), 7, rng);
  CHECK_THROWS_AS(estimate_homography(few), Error);
  try {
    estimate_homography(few);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_matches);
  }

  std::vector<KeypointMatch> line;
  for (int i = 0; i < 20; ++i) line.push_back({{i * 10.0, i * 5.0}, {i * 10.0 + 1, i * 5.0}, true});
  try {
    estimate_homography(line);
    FAIL("collinear matches accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_configuration);
  }

  auto untracked = matches_under(Homographyd::identity(), 50, rng);
  for (auto& k : untracked) k.tracked = false;
  CHECK_THROWS_AS(estimate_homography(untracked), Error);
}

TEST_CASE("DLT through four exact points") {
  const Homographyd truth = projective_truth();
  const std::vector<Point2d> src{{0, 0}, {100, 0}, {0, 100}, {100, 100}};
  std::vector<Point2d> dst;
  for (const auto& p : src) dst.push_back(truth.apply(p));
  CHECK(mean_corner_error(fit_homography_dlt(src, dst), truth, 100, 100) < 1e-8);
}

TEST_CASE("warp by identity and by integer translation") {
  const GrayImage g = textured_gray(80, 60);
  const WarpedImage same = warp_frame(g, Homographyd::identity());
  CHECK(same.image == g);
  for (auto v : same.valid.pixels()) CHECK(v == kMaskOn);

  const WarpedImage t = warp_frame(g, Homographyd::translation(5, 0));
  for (int y = 0; y < 60; ++y) {
    for (int x = 0; x < 5; ++x) CHECK(t.valid(x, y) == 0);
    for (int x = 5; x < 80; ++x) {
      REQUIRE(t.valid(x, y) == kMaskOn);
      REQUIRE(t.image(x, y) == g(x - 5, y));
    }
  }
}

TEST_CASE("warp then inverse warp recovers the interior") {
  const GrayImage g = textured_gray(200, 150);
  Homographyd::Matrix m;
  m << 0.99, 0.02, 3.3, -0.015, 1.01, -2.7, 1e-5, 0, 1;
  const Homographyd h(m);
  const WarpedImage there = warp_frame(g, h);
  const WarpedImage back = warp_frame(there.image, h.inverse());
  for (int y = 20; y < 130; ++y)
    for (int x = 20; x < 180; ++x) REQUIRE(std::abs(back.image(x, y) - g(x, y)) <= 2);
}

TEST_CASE("background motion term is the mean residual") {
  const Homographyd h = Homographyd::translation(1, 0);
  std::vector<KeypointMatch> m{{{0, 0}, {1, 0}, true}, {{5, 5}, {6, 5}, true}};
  CHECK(background_motion_term(m, h) == 0.0);
  m = {{{0, 0}, {2, 0}, true}, {{5, 5}, {6, 8}, true}, {{9, 9}, {90, 90}, false}};
  CHECK(background_motion_term(m, h) == doctest::Approx(2.0));

  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 2);
  std::vector<KeypointMatch> r;
  long double sum = 0;
  for (int i = 0; i < 300; ++i) {
    const Point2d p(i, 2 * i), c = h.apply(p) + Point2d(n(rng), n(rng));
    r.push_back({p, c, true});
    sum += std::hypot(static_cast<long double>(c.x() - p.x() - 1), static_cast<long double>(c.y() - p.y()));
  }
  CHECK(background_motion_term(r, h) == doctest::Approx(static_cast<double>(sum / 300)).epsilon(1e-12));
  CHECK_THROWS_AS(background_motion_term({}, h), Error);
}

TEST_CASE("alignment of a known camera motion") {
  SceneConfig c = scene_preset("pan");
  c.frames = 2;
  c.target.reset();
  c.camera = {4.0, -2.5, 0.4, 0.003, 0, 0};
  c.camera_random = {};
  const Scene s = generate(c);
  const Alignment a = align_frames(to_grayscale(s.frames[0]), to_grayscale(s.frames[1]));
  CHECK_FALSE(a.fallback);
  CHECK(mean_corner_error(a.transform, s.truth.homographies[1], c.width, c.height) < 0.5);
  CHECK(a.background_motion < 0.5);
}

TEST_CASE("textureless frames fall back to the identity") {
  const GrayImage g(160, 120, 90);
  const Alignment a = align_frames(g, g);
  CHECK(a.fallback);
  CHECK(a.transform.matrix() == Homographyd::Matrix::Identity());
}
