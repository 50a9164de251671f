#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/LU>

#include "mavdet/geometry.hpp"

namespace mavdet {

/// 3x3 projective transform normalized so that the bottom-right entry is 1.
template <typename Scalar>
class Homography {
 public:
  using Matrix = Eigen::Matrix<Scalar, 3, 3>;

  Homography() : m_(Matrix::Identity()) {}
  explicit Homography(const Matrix& m) : m_(m / m(2, 2)) {}

  static Homography identity() { return Homography(); }
  static Homography translation(Scalar dx, Scalar dy) {
    Matrix m = Matrix::Identity();
    m(0, 2) = dx;
    m(1, 2) = dy;
    return Homography(m);
  }

  const Matrix& matrix() const { return m_; }
  Scalar operator()(int r, int c) const { return m_(r, c); }

  Point2<Scalar> apply(const Point2<Scalar>& p) const {
    const Scalar u = m_(0, 0) * p.x() + m_(0, 1) * p.y() + m_(0, 2);
    const Scalar v = m_(1, 0) * p.x() + m_(1, 1) * p.y() + m_(1, 2);
    const Scalar w = m_(2, 0) * p.x() + m_(2, 1) * p.y() + m_(2, 2);
    return {u / w, v / w};
  }

  Homography inverse() const { return Homography(Matrix(m_.inverse())); }

  /// Composition: (a * b).apply(p) == a.apply(b.apply(p)).
  friend Homography operator*(const Homography& a, const Homography& b) {
    return Homography(Matrix(a.m_ * b.m_));
  }

  Scalar affine_determinant() const { return m_(0, 0) * m_(1, 1) - m_(0, 1) * m_(1, 0); }

  bool finite() const { return m_.allFinite(); }

  /// Conjugate a transform expressed in coordinates shifted by `offset`
  /// (local = global - offset) into global coordinates.
  Homography from_local(const Point2<Scalar>& offset) const {
    Matrix to_local = Matrix::Identity();
    to_local(0, 2) = -offset.x();
    to_local(1, 2) = -offset.y();
    Matrix to_global = Matrix::Identity();
    to_global(0, 2) = offset.x();
    to_global(1, 2) = offset.y();
    return Homography(Matrix(to_global * m_ * to_local));
  }

 private:
  Matrix m_;
};

using Homographyd = Homography<double>;

/// Mean displacement of the four image corners mapped by two transforms.
template <typename Scalar>
Scalar mean_corner_error(const Homography<Scalar>& a, const Homography<Scalar>& b, int width,
                         int height) {
  const Point2<Scalar> corners[4] = {{0, 0}, {Scalar(width - 1), 0}, {0, Scalar(height - 1)},
                                     {Scalar(width - 1), Scalar(height - 1)}};
  Scalar sum = 0;
  for (const auto& c : corners) sum += (a.apply(c) - b.apply(c)).norm();
  return sum / Scalar(4);
}

}  // namespace mavdet
