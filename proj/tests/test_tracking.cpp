#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "mavdet/synthetic.hpp"
#include "mavdet/tracking.hpp"

using namespace mavdet;

namespace {

TrackStated with_velocity(double vx, double vy, double ax = 0, double ay = 0) {
  TrackStated s;
  s.x << vx, vy, ax, ay;
  s.has_velocity = true;
  return s;
}

void check_psd(const Eigen::Matrix4d& p) {
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(p);
  CHECK(es.eigenvalues().minCoeff() >= -1e-9);
}

}  // namespace

TEST_CASE("model matrices") {
  const auto m = KalmanModeld::make();
  Eigen::Matrix4d expected;
  expected << 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1;
  CHECK(m.transition == expected);
  CHECK(m.measurement(0, 0) == 1);
  CHECK(m.measurement(1, 1) == 1);
  CHECK(m.measurement.sum() == 2);
  CHECK(m.process_noise == Eigen::Matrix4d::Identity() * 0.01);
  CHECK(m.measurement_noise == Eigen::Matrix2d::Identity());
  CHECK(m.initial_covariance == Eigen::Matrix4d::Identity() * 10);
}

TEST_CASE("predict examples") {
  const auto m = KalmanModeld::make();
  auto p = kf_predict(with_velocity(5, 0), m);
  CHECK(p.measurement == Point2d(5, 0));
  p = kf_predict(with_velocity(5, 0, 1, 0), m);
  CHECK(p.state.x(0) == 6);
  CHECK(p.measurement == Point2d(6, 0));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 100; ++i) {
    TrackStated s = with_velocity(n(rng), n(rng), n(rng), n(rng));
    // Uncorrelated covariance; strongly anti-correlated velocity/acceleration can shrink the trace.
    s.P = Eigen::Vector4d::NullaryExpr([&] { const double v = n(rng); return v * v; }).asDiagonal();
    CHECK(kf_predict(s, m).state.P.trace() > s.P.trace());
  }
}

TEST_CASE("first measurement seeds the velocity") {
  const auto m = KalmanModeld::make();
  TrackStated s;
  s = kf_update(kf_predict(s, m).state, m, Point2d(3, -2));
  CHECK(s.has_velocity);
  CHECK(s.x == Eigen::Vector4d(3, -2, 0, 0));
  CHECK(s.P == m.initial_covariance);
  CHECK(s.lost == 0);
}

TEST_CASE("constant velocity converges") {
  const auto m = KalmanModeld::make(1, 1e-12, 1, 10);
  TrackStated s;
  for (int k = 0; k < 50; ++k) s = kf_update(kf_predict(s, m).state, m, Point2d(5, 0));
  CHECK(std::abs(s.x(0) - 5) < 1e-3);
  CHECK(std::abs(s.x(1)) < 1e-3);
}

TEST_CASE("misses keep the prediction exactly") {
  const auto m = KalmanModeld::make();
  const Eigen::Vector4d x0(2.5, -1.25, 0.5, 0.125);
  TrackStated s = with_velocity(x0(0), x0(1), x0(2), x0(3));
  Eigen::Matrix4d mk = Eigen::Matrix4d::Identity();
  for (int k = 1; k <= 40; ++k) {
    const auto pred = kf_predict(s, m);
    s = kf_update(pred.state, m, std::nullopt);
    mk = m.transition * mk;
    CHECK(s.x == pred.state.x);
    CHECK(s.P == pred.state.P);
    CHECK(s.lost == k);
    CHECK(s.x == mk * x0);
  }
  s = kf_update(kf_predict(s, m).state, m, Point2d(0, 0));
  CHECK(s.lost == 0);
}

TEST_CASE("covariance stays symmetric PSD over random event sequences") {
  const auto m = KalmanModeld::make();
  std::mt19937_64 rng(99);
  std::bernoulli_distribution hit(0.6);
  std::normal_distribution<double> z(0, 8);
  for (int seq = 0; seq < 10000; ++seq) {
    TrackStated s;
    const int len = 1 + int(rng() % 40);
    for (int i = 0; i < len; ++i) {
      const auto p = kf_predict(s, m).state;
      s = kf_update(p, m, hit(rng) ? std::optional<Point2d>(Point2d(z(rng), z(rng))) : std::nullopt);
    }
    if (seq % 10 == 0) check_psd(s.P);
    else if ((s.P - s.P.transpose()).cwiseAbs().maxCoeff() > 1e-9) FAIL("asymmetric covariance");
  }
}

TEST_CASE("degenerate measurement noise is rejected") {
  auto m = KalmanModeld::make();
  m.measurement_noise.setZero();
  TrackStated s = with_velocity(1, 1);
  s.P.setZero();
  CHECK_THROWS_AS(kf_update(s, m, Point2d(1, 1)), Error);
}

TEST_CASE("velocity measurement and center prediction") {
  const auto id = Homographyd::identity();
  CHECK(measure_velocity(Point2d(100, 100), Point2d(103, 104), id) == Point2d(3, 4));
  CHECK(measure_velocity(Point2d(100, 100), Point2d(103, 104), Homographyd::translation(3, 4)) == Point2d(0, 0));
  CHECK(predict_center(Point2d(100, 100), id, Point2d(3, 4)) == Point2d(103, 104));
  CHECK(predict_center(Point2d(100, 100), Homographyd::translation(10, 0), Point2d(0, 0)) == Point2d(110, 100));
  CHECK(predict_center(Point2d(7.5, 9.25), id, Point2d(0, 0)) == Point2d(7.5, 9.25));
}

TEST_CASE("stationary world target under a pan has near zero relative velocity") {
  SceneConfig c = scene_preset("pan");
  c.frames = 30;
  c.width = 320;
  c.height = 240;
  c.target->anchor = Anchor::world;
  c.target->velocity = {0, 0};
  const SceneTruth t = generate(c).truth;
  for (int n = 1; n < c.frames; ++n) {
    REQUIRE(t.centers[n]);
    CHECK(measure_velocity(*t.centers[n - 1], *t.centers[n], t.homographies[n]).norm() < 0.5);
  }
}

TEST_CASE("predicted centers follow a constant velocity target under pan") {
  SceneConfig c = scene_preset("pan");
  c.frames = 60;
  c.width = 640;
  c.height = 480;
  c.target->velocity = {2, 1};
  const SceneTruth t = generate(c).truth;
  const auto m = KalmanModeld::make();
  TrackStated s;
  s.last_center = *t.centers[0];
  for (int n = 1; n < c.frames; ++n) {
    const auto pred = kf_predict(s, m);
    const Point2d guess = predict_center(s.last_center, t.homographies[n], pred.measurement);
    // Bounces at the border change the velocity; skip those frames.
    const bool steady = (t.relative_velocities[n] - t.relative_velocities[n - 1]).norm() < 1e-6;
    if (n > 10 && steady) CHECK((guess - *t.centers[n]).norm() < 10);
    s = kf_update(pred.state, m, measure_velocity(s.last_center, *t.centers[n], t.homographies[n]));
    s.last_center = *t.centers[n];
  }
}

TEST_CASE("search region size") {
  CHECK(search_region_side(0) == 300);
  CHECK(search_region_side(10) == 340);
  CHECK(search_region_side(30) == 420);
  for (int k = 0; k < 100; ++k) CHECK(search_region_side(k + 1) >= search_region_side(k));

  const Box corner = search_region(Point2d(5, 5), 0, 1920, 1080);
  CHECK(corner.x == 0);
  CHECK(corner.y == 0);
  CHECK(corner.w == 300);
  CHECK(corner.h == 300);
  const Box far = search_region(Point2d(1915, 1075), 30, 1920, 1080);
  CHECK(far.right() == 1920);
  CHECK(far.bottom() == 1080);
  CHECK(far.w == 420);
  CHECK(search_region(Point2d(100, 100), 200, 640, 480).w == 480);
}
