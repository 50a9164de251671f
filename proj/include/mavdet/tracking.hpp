#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <type_traits>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mavdet/error.hpp"
#include "mavdet/geometry.hpp"
#include "mavdet/homography.hpp"

namespace mavdet {

/// Constant-acceleration model over the target's relative velocity:
/// state (vx, vy, ax, ay), measurement (vx, vy).
template <typename Scalar>
struct KalmanModel {
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
  using Matrix24 = Eigen::Matrix<Scalar, 2, 4>;
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

  Matrix4 transition;
  Matrix24 measurement;
  Matrix4 process_noise;
  Matrix2 measurement_noise;
  Matrix4 initial_covariance;

  static KalmanModel make(Scalar dt = 1, Scalar q = Scalar(0.01), Scalar r = 1, Scalar p0 = 10) {
    KalmanModel m;
    m.transition = Matrix4::Identity();
    m.transition(0, 2) = dt;
    m.transition(1, 3) = dt;
    m.measurement = Matrix24::Zero();
    m.measurement(0, 0) = 1;
    m.measurement(1, 1) = 1;
    m.process_noise = Matrix4::Identity() * q;
    m.measurement_noise = Matrix2::Identity() * r;
    m.initial_covariance = Matrix4::Identity() * p0;
    return m;
  }
};

template <typename Scalar>
struct TrackState {
  Eigen::Matrix<Scalar, 4, 1> x = Eigen::Matrix<Scalar, 4, 1>::Zero();
  Eigen::Matrix<Scalar, 4, 4> P = Eigen::Matrix<Scalar, 4, 4>::Identity() * Scalar(10);
  Point2<Scalar> last_center{0, 0};
  BBox<Scalar> last_box{};
  int lost{0};
  /// False until the first velocity measurement has initialized x.
  bool has_velocity{false};

  Point2<Scalar> velocity() const { return x.template head<2>(); }
};

template <typename Scalar>
struct KalmanPrediction {
  TrackState<Scalar> state;
  Point2<Scalar> measurement;  ///< N * x of the predicted state
};

/// x <- M x, P <- M P M^T + Q.
template <typename Scalar>
KalmanPrediction<Scalar> kf_predict(const TrackState<Scalar>& s, const KalmanModel<Scalar>& m) {
  KalmanPrediction<Scalar> out{s, {}};
  out.state.x = m.transition * s.x;
  out.state.P = m.transition * s.P * m.transition.transpose() + m.process_noise;
  out.state.P = Scalar(0.5) * (out.state.P + out.state.P.transpose()).eval();
  out.measurement = m.measurement * out.state.x;
  return out;
}

/// Corrects a predicted state with `z`, or on a miss keeps the prediction and
/// counts the lost frame. The first measurement ever seeds (vx, vy) = z.
template <typename Scalar>
TrackState<Scalar> kf_update(const TrackState<Scalar>& predicted, const KalmanModel<Scalar>& m,
                             const std::optional<Point2<std::type_identity_t<Scalar>>>& z) {
  TrackState<Scalar> s = predicted;
  if (!z) {
    ++s.lost;
    return s;
  }
  s.lost = 0;
  if (!s.has_velocity) {
    s.x << z->x(), z->y(), 0, 0;
    s.P = m.initial_covariance;
    s.has_velocity = true;
    return s;
  }
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
  const Matrix2 innovation_cov = m.measurement * s.P * m.measurement.transpose() + m.measurement_noise;
  const Eigen::LDLT<Matrix2> ldlt(innovation_cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      std::abs(innovation_cov.determinant()) < std::numeric_limits<Scalar>::epsilon())
    throw Error(ErrorCode::numeric_degeneracy, "innovation covariance is not invertible");
  const Eigen::Matrix<Scalar, 4, 2> gain = ldlt.solve(m.measurement * s.P).transpose();
  s.x += gain * (*z - m.measurement * s.x);
  // Joseph form keeps P symmetric positive semi-definite.
  const Matrix4 ikh = Matrix4::Identity() - gain * m.measurement;
  s.P = ikh * s.P * ikh.transpose() + gain * m.measurement_noise * gain.transpose();
  s.P = Scalar(0.5) * (s.P + s.P.transpose()).eval();
  return s;
}

/// Apparent displacement left after removing camera motion: cur - H(prev).
template <typename Scalar>
Point2<Scalar> measure_velocity(const Point2<Scalar>& prev_center, const Point2<Scalar>& cur_center,
                                const Homography<Scalar>& h) {
  return cur_center - h.apply(prev_center);
}

/// H(prev) + U.
template <typename Scalar>
Point2<Scalar> predict_center(const Point2<Scalar>& prev_center, const Homography<Scalar>& h,
                              const Point2<Scalar>& velocity) {
  return h.apply(prev_center) + velocity;
}

/// Side of the local search square after `lost` consecutive misses.
inline double search_region_side(int lost, double base = 300.0, double growth = 4.0) {
  return base + growth * lost;
}

inline Box search_region(const Point2d& center, int lost, int width, int height, double base = 300.0,
                         double growth = 4.0) {
  return clamp_region(center, search_region_side(lost, base, growth), width, height);
}

using KalmanModeld = KalmanModel<double>;
using TrackStated = TrackState<double>;

}  // namespace mavdet
