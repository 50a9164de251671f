#include "mavdet/motion_compensation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>

namespace mavdet {
namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
  return i;
}

// 5-tap binomial blur followed by 2x decimation.
FloatImage pyr_down(const FloatImage& src) {
  const int w = src.width(), h = src.height();
  const int ow = (w + 1) / 2, oh = (h + 1) / 2;
  FloatImage rows(ow, h);
  for (int y = 0; y < h; ++y) {
    const float* s = src.row(y);
    float* d = rows.row(y);
    for (int x = 0; x < ow; ++x) {
      const int cx = 2 * x;
      if (cx >= 2 && cx + 2 < w) {
        d[x] = (s[cx - 2] + 4 * s[cx - 1] + 6 * s[cx] + 4 * s[cx + 1] + s[cx + 2]) * (1.0f / 16);
      } else {
        d[x] = (s[reflect101(cx - 2, w)] + 4 * s[reflect101(cx - 1, w)] + 6 * s[cx] +
                4 * s[reflect101(cx + 1, w)] + s[reflect101(cx + 2, w)]) * (1.0f / 16);
      }
    }
  }
  FloatImage out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    const int cy = 2 * y;
    const float* r0 = rows.row(reflect101(cy - 2, h));
    const float* r1 = rows.row(reflect101(cy - 1, h));
    const float* r2 = rows.row(cy);
    const float* r3 = rows.row(reflect101(cy + 1, h));
    const float* r4 = rows.row(reflect101(cy + 2, h));
    float* d = out.row(y);
    for (int x = 0; x < ow; ++x)
      d[x] = (r0[x] + 4 * r1[x] + 6 * r2[x] + 4 * r3[x] + r4[x]) * (1.0f / 16);
  }
  return out;
}

// Samples a (2*half+1)^2 window centered at (cx, cy). All samples share one
// fractional offset, so the bilinear weights are computed once.
void sample_window(const FloatImage& img, double cx, double cy, int half, float* out) {
  const int w = img.width(), h = img.height();
  const double fx0 = std::floor(cx), fy0 = std::floor(cy);
  const float ax = static_cast<float>(cx - fx0), ay = static_cast<float>(cy - fy0);
  const float w00 = (1 - ax) * (1 - ay), w10 = ax * (1 - ay), w01 = (1 - ax) * ay, w11 = ax * ay;
  const int x0 = static_cast<int>(fx0) - half, y0 = static_cast<int>(fy0) - half;
  const int n = 2 * half + 1;
  if (x0 >= 0 && y0 >= 0 && x0 + n < w && y0 + n < h) {
    using Row = Eigen::Map<const Eigen::ArrayXf>;
    for (int j = 0; j < n; ++j) {
      const float* r0 = img.row(y0 + j) + x0;
      const float* r1 = img.row(y0 + j + 1) + x0;
      Eigen::Map<Eigen::ArrayXf>(out + j * n, n) =
          w00 * Row(r0, n) + w10 * Row(r0 + 1, n) + w01 * Row(r1, n) + w11 * Row(r1 + 1, n);
    }
    return;
  }
  // Near the border: gather clamped rows once, then blend as above.
  thread_local std::vector<float> rows;
  rows.resize(static_cast<std::size_t>(2 * (n + 1)));
  float* a = rows.data();
  float* b = a + n + 1;
  for (int j = 0; j < n; ++j) {
    const float* ra = img.row(std::clamp(y0 + j, 0, h - 1));
    const float* rb = img.row(std::clamp(y0 + j + 1, 0, h - 1));
    for (int i = 0; i <= n; ++i) {
      const int x = std::clamp(x0 + i, 0, w - 1);
      a[i] = ra[x];
      b[i] = rb[x];
    }
    for (int i = 0; i < n; ++i) out[j * n + i] = w00 * a[i] + w10 * a[i + 1] + w01 * b[i] + w11 * b[i + 1];
  }
}

struct LkScratch {
  std::vector<float> patch, tmpl, ix, iy, cur;
};

// Tracks one point from pyramid `a` into pyramid `b`. Returns false when the
// gradient matrix is too weak at the base level or the point leaves the image.
bool track_point(const ImagePyramid& a, const ImagePyramid& b, const Point2d& p,
                 const LkParams& params, LkScratch& s, Point2d& result) {
  const int half = params.window / 2;
  const int n = 2 * half + 1;
  const int pn = n + 2;
  const int count = n * n;
  s.patch.resize(static_cast<std::size_t>(pn * pn));
  s.ix.resize(static_cast<std::size_t>(count));
  s.iy.resize(static_cast<std::size_t>(count));
  s.cur.resize(static_cast<std::size_t>(count));
  s.tmpl.resize(static_cast<std::size_t>(count));
  using Vec = Eigen::Map<const Eigen::ArrayXf>;
  const Vec tmpl(s.tmpl.data(), count), gx(s.ix.data(), count), gy(s.iy.data(), count), cur(s.cur.data(), count);

  const int top = std::min(params.levels, std::min(a.levels(), b.levels()) - 1);
  Point2d guess(0, 0);
  for (int level = top; level >= 0; --level) {
    const FloatImage& ia = a.level(level);
    const FloatImage& ib = b.level(level);
    const double scale = 1.0 / double(1 << level);
    const Point2d pl = p * scale;

    sample_window(ia, pl.x(), pl.y(), half + 1, s.patch.data());
    double mx = 0, my = 0;
    for (int j = 0; j < n; ++j) {
      const float* up = &s.patch[static_cast<std::size_t>(j * pn)];
      const float* mid = up + pn;
      const float* dn = mid + pn;
      for (int i = 0; i < n; ++i) {
        // Scharr kernel normalized to intensity per pixel.
        const float dx = (3 * (up[i + 2] - up[i]) + 10 * (mid[i + 2] - mid[i]) + 3 * (dn[i + 2] - dn[i])) *
                         (1.0f / 32);
        const float dy = (3 * (dn[i] - up[i]) + 10 * (dn[i + 1] - up[i + 1]) + 3 * (dn[i + 2] - up[i + 2])) *
                         (1.0f / 32);
        s.ix[static_cast<std::size_t>(j * n + i)] = dx;
        s.iy[static_cast<std::size_t>(j * n + i)] = dy;
        mx += dx;
        my += dy;
      }
    }
    // Centering the gradients solves for a per-window intensity offset along
    // with the shift, so global brightness changes do not bias the flow.
    mx /= count;
    my /= count;
    double gxx = 0, gxy = 0, gyy = 0;
    for (int k = 0; k < count; ++k) {
      const float dx = s.ix[static_cast<std::size_t>(k)] -= static_cast<float>(mx);
      const float dy = s.iy[static_cast<std::size_t>(k)] -= static_cast<float>(my);
      gxx += dx * dx;
      gxy += dx * dy;
      gyy += dy * dy;
    }
    const double min_eig = 0.5 * (gxx + gyy - std::sqrt((gxx - gyy) * (gxx - gyy) + 4 * gxy * gxy)) / count;
    if (!(min_eig >= params.min_eigen)) {
      if (level == 0) return false;
      guess *= 2.0;
      continue;
    }
    const double det = gxx * gyy - gxy * gxy;
    for (int j = 0; j < n; ++j)
      std::copy_n(&s.patch[static_cast<std::size_t>((j + 1) * pn + 1)], n, &s.tmpl[static_cast<std::size_t>(j * n)]);

    Point2d nu(0, 0);
    for (int it = 0; it < params.max_iterations; ++it) {
      const Point2d q = pl + guess + nu;
      if (!(q.x() >= -half && q.y() >= -half && q.x() <= ib.width() - 1 + half &&
            q.y() <= ib.height() - 1 + half))
        return false;
      sample_window(ib, q.x(), q.y(), half, s.cur.data());
      const double bx = ((tmpl - cur) * gx).sum(), by = ((tmpl - cur) * gy).sum();
      const Point2d delta((gyy * bx - gxy * by) / det, (gxx * by - gxy * bx) / det);
      nu += delta;
      if (delta.norm() < params.epsilon) break;
    }
    guess += nu;
    if (level > 0) guess *= 2.0;
  }
  result = p + guess;
  const FloatImage& base = b.level(0);
  return result.allFinite() && result.x() >= 0 && result.y() >= 0 && result.x() <= base.width() - 1 &&
         result.y() <= base.height() - 1;
}

struct Normalization {
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
};

Normalization normalization_for(std::span<const Point2d> pts) {
  Point2d mean(0, 0);
  for (const auto& p : pts) mean += p;
  mean /= double(pts.size());
  double dist = 0;
  for (const auto& p : pts) dist += (p - mean).norm();
  dist /= double(pts.size());
  const double s = dist > 0 ? std::sqrt(2.0) / dist : 1.0;
  Normalization n;
  n.t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return n;
}

Point2d transform_point(const Eigen::Matrix3d& m, const Point2d& p) {
  const Eigen::Vector3d v = m * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return {v.x() / v.z(), v.y() / v.z()};
}

// Minimizes the forward reprojection error with Levenberg-Marquardt in the
// normalized frame; h(2,2) is held at 1.
Eigen::Matrix3d refine(const Eigen::Matrix3d& initial, std::span<const Point2d> src,
                       std::span<const Point2d> dst) {
  const Normalization ns = normalization_for(src), nd = normalization_for(dst);
  std::vector<Point2d> a(src.size()), b(dst.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    a[i] = transform_point(ns.t, src[i]);
    b[i] = transform_point(nd.t, dst[i]);
  }
  Eigen::Matrix3d hn = nd.t * initial * ns.t.inverse();
  hn /= hn(2, 2);
  Eigen::Matrix<double, 8, 1> h;
  h << hn(0, 0), hn(0, 1), hn(0, 2), hn(1, 0), hn(1, 1), hn(1, 2), hn(2, 0), hn(2, 1);

  auto cost = [&](const Eigen::Matrix<double, 8, 1>& v) {
    double c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x = a[i].x(), y = a[i].y();
      const double w = v[6] * x + v[7] * y + 1;
      const double u = (v[0] * x + v[1] * y + v[2]) / w - b[i].x();
      const double t = (v[3] * x + v[4] * y + v[5]) / w - b[i].y();
      c += u * u + t * t;
    }
    return c;
  };

  double lambda = 1e-3;
  double current = cost(h);
  for (int iter = 0; iter < 20; ++iter) {
    Eigen::Matrix<double, 8, 8> jtj = Eigen::Matrix<double, 8, 8>::Zero();
    Eigen::Matrix<double, 8, 1> jtr = Eigen::Matrix<double, 8, 1>::Zero();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x = a[i].x(), y = a[i].y();
      const double w = h[6] * x + h[7] * y + 1;
      const double u = (h[0] * x + h[1] * y + h[2]) / w;
      const double v = (h[3] * x + h[4] * y + h[5]) / w;
      Eigen::Matrix<double, 8, 1> ju, jv;
      ju << x / w, y / w, 1 / w, 0, 0, 0, -u * x / w, -u * y / w;
      jv << 0, 0, 0, x / w, y / w, 1 / w, -v * x / w, -v * y / w;
      jtj += ju * ju.transpose() + jv * jv.transpose();
      jtr += ju * (u - b[i].x()) + jv * (v - b[i].y());
    }
    bool improved = false;
    for (int attempt = 0; attempt < 8 && !improved; ++attempt) {
      Eigen::Matrix<double, 8, 8> damped = jtj;
      damped.diagonal() *= (1 + lambda);
      const Eigen::Matrix<double, 8, 1> step = damped.ldlt().solve(-jtr);
      const Eigen::Matrix<double, 8, 1> candidate = h + step;
      const double c = cost(candidate);
      if (std::isfinite(c) && c <= current) {
        const double gain = current - c;
        h = candidate;
        current = c;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
        if (gain <= 1e-15 * (1 + current)) iter = 1000;
      } else {
        lambda *= 10;
      }
    }
    if (!improved) break;
  }
  Eigen::Matrix3d out;
  out << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1;
  Eigen::Matrix3d result = nd.t.inverse() * out * ns.t;
  return result / result(2, 2);
}

double min_scatter_eigen(std::span<const Point2d> pts) {
  Point2d mean(0, 0);
  for (const auto& p : pts) mean += p;
  mean /= double(pts.size());
  Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) c += (p - mean) * (p - mean).transpose();
  c /= double(pts.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c);
  return es.eigenvalues()(0);
}

bool has_collinear_triple(const Point2d* p) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k) {
        const Point2d u = p[j] - p[i], v = p[k] - p[i];
        const double cross = u.x() * v.y() - u.y() * v.x();
        if (std::abs(cross) < 1e-6 * (1 + u.squaredNorm() + v.squaredNorm())) return true;
      }
  return false;
}

}  // namespace

ImagePyramid::ImagePyramid(const GrayImage& base, int levels) {
  levels_.push_back(to_float(base));
  for (int i = 0; i < levels; ++i) {
    const FloatImage& last = levels_.back();
    if (last.width() < 16 || last.height() < 16) break;
    levels_.push_back(pyr_down(last));
  }
}

std::vector<Point2d> sample_grid_keypoints(int width, int height, int cols, int rows) {
  if (cols < 1 || rows < 1 || width < cols || height < rows)
    throw Error(ErrorCode::invalid_dimensions, "grid does not fit the image");
  std::vector<Point2d> pts;
  pts.reserve(static_cast<std::size_t>(cols * rows));
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < cols; ++i)
      pts.emplace_back((i + 0.5) * width / cols, (j + 0.5) * height / rows);
  return pts;
}

std::vector<KeypointMatch> track_keypoints(const ImagePyramid& prev, const ImagePyramid& cur,
                                           std::span<const Point2d> points, const LkParams& params) {
  std::vector<KeypointMatch> out;
  out.reserve(points.size());
  LkScratch scratch;
  for (const auto& p : points) {
    KeypointMatch m{p, p, false};
    Point2d fwd, back;
    if (track_point(prev, cur, p, params, scratch, fwd) &&
        track_point(cur, prev, fwd, params, scratch, back) && (back - p).norm() <= params.fb_threshold) {
      m.cur = fwd;
      m.tracked = true;
    }
    out.push_back(m);
  }
  return out;
}

std::vector<KeypointMatch> track_keypoints(const GrayImage& prev, const GrayImage& cur,
                                           std::span<const Point2d> points, const LkParams& params) {
  if (!prev.same_shape(cur)) throw Error(ErrorCode::dimension_mismatch, "track_keypoints");
  if (is_constant(prev) || is_constant(cur)) {
    std::vector<KeypointMatch> out;
    for (const auto& p : points) out.push_back({p, p, false});
    return out;
  }
  return track_keypoints(ImagePyramid(prev, params.levels), ImagePyramid(cur, params.levels), points,
                         params);
}

Homographyd fit_homography_dlt(std::span<const Point2d> src, std::span<const Point2d> dst) {
  if (src.size() != dst.size() || src.size() < 4)
    throw Error(ErrorCode::insufficient_matches, "DLT needs at least 4 correspondences");
  const Normalization ns = normalization_for(src), nd = normalization_for(dst);
  Eigen::MatrixXd a(2 * src.size(), 9);
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Point2d p = transform_point(ns.t, src[i]);
    const Point2d q = transform_point(nd.t, dst[i]);
    const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(static_cast<Eigen::Index>(2 * i)) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(static_cast<Eigen::Index>(2 * i + 1)) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  Eigen::Matrix3d m = nd.t.inverse() * hn * ns.t;
  if (std::abs(m(2, 2)) < std::numeric_limits<double>::min())
    throw Error(ErrorCode::degenerate_configuration, "homography maps the origin to infinity");
  return Homographyd(m);
}

HomographyFit estimate_homography(std::span<const KeypointMatch> matches, const RansacParams& params) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < matches.size(); ++i)
    if (matches[i].tracked) idx.push_back(i);
  if (static_cast<int>(idx.size()) < std::max(params.min_matches, 4))
    throw Error(ErrorCode::insufficient_matches,
                std::to_string(idx.size()) + " tracked matches, need " + std::to_string(params.min_matches));

  std::vector<Point2d> src(idx.size()), dst(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    src[k] = matches[idx[k]].prev;
    dst[k] = matches[idx[k]].cur;
  }
  if (min_scatter_eigen(src) < 1e-6 || min_scatter_eigen(dst) < 1e-6)
    throw Error(ErrorCode::degenerate_configuration, "matched points are collinear");

  const double thr2 = params.reprojection_threshold * params.reprojection_threshold;
  const std::size_t n = idx.size();
  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::vector<char> best_mask(n, 0);
  int best_count = 0;
  double best_error = std::numeric_limits<double>::infinity();
  long long needed = params.max_iterations;
  for (long long it = 0; it < needed && it < params.max_iterations; ++it) {
    std::size_t s[4];
    for (int k = 0; k < 4; ++k) {
      bool fresh;
      do {
        s[k] = pick(rng);
        fresh = std::find(s, s + k, s[k]) == s + k;
      } while (!fresh);
    }
    const Point2d ps[4] = {src[s[0]], src[s[1]], src[s[2]], src[s[3]]};
    const Point2d pd[4] = {dst[s[0]], dst[s[1]], dst[s[2]], dst[s[3]]};
    if (has_collinear_triple(ps) || has_collinear_triple(pd)) continue;
    Homographyd h;
    try {
      h = fit_homography_dlt(ps, pd);
    } catch (const Error&) {
      continue;
    }
    if (!h.finite()) continue;

    int count = 0;
    double error = 0;
    std::vector<char> mask(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      const double e2 = (h.apply(src[k]) - dst[k]).squaredNorm();
      if (e2 < thr2) {
        mask[k] = 1;
        ++count;
        error += e2;
      }
    }
    if (count > best_count || (count == best_count && error < best_error)) {
      best_count = count;
      best_error = error;
      best_mask = std::move(mask);
      const double ratio = double(count) / double(n);
      const double denom = std::log(1.0 - std::pow(ratio, 4));
      if (ratio >= 1.0) {
        needed = it + 1;
      } else if (denom < 0) {
        needed = std::min<long long>(params.max_iterations,
                                     static_cast<long long>(std::ceil(std::log(1.0 - params.confidence) / denom)));
      }
    }
  }
  if (best_count < 4) throw Error(ErrorCode::degenerate_configuration, "no consensus homography");

  Homographyd h;
  for (int round = 0; round < 3; ++round) {
    std::vector<Point2d> is, id;
    for (std::size_t k = 0; k < n; ++k)
      if (best_mask[k]) {
        is.push_back(src[k]);
        id.push_back(dst[k]);
      }
    if (is.size() < 4 || min_scatter_eigen(is) < 1e-6)
      throw Error(ErrorCode::degenerate_configuration, "inliers are collinear");
    h = Homographyd(refine(fit_homography_dlt(is, id).matrix(), is, id));
    std::vector<char> mask(n, 0);
    int count = 0;
    for (std::size_t k = 0; k < n; ++k)
      if ((h.apply(src[k]) - dst[k]).squaredNorm() < thr2) {
        mask[k] = 1;
        ++count;
      }
    const bool same = mask == best_mask;
    if (count >= 4) best_mask = std::move(mask);
    if (same) break;
  }
  if (!h.finite() || std::abs(h.affine_determinant()) < params.min_affine_det)
    throw Error(ErrorCode::degenerate_configuration, "estimated homography is not invertible");

  HomographyFit fit;
  fit.transform = h;
  fit.inliers.assign(matches.size(), false);
  for (std::size_t k = 0; k < n; ++k)
    if (best_mask[k]) {
      fit.inliers[idx[k]] = true;
      ++fit.inlier_count;
    }
  return fit;
}

WarpedImage warp_frame(const GrayImage& prev, const Homographyd& h) {
  const int w = prev.width(), ht = prev.height();
  WarpedImage out{GrayImage(w, ht), BinaryMask(w, ht)};
  const Eigen::Matrix3d inv = h.inverse().matrix();
  const double xmax = w - 1, ymax = ht - 1;
  for (int y = 0; y < ht; ++y) {
    std::uint8_t* dst = out.image.row(y);
    std::uint8_t* valid = out.valid.row(y);
    const double bx = inv(0, 1) * y + inv(0, 2);
    const double by = inv(1, 1) * y + inv(1, 2);
    const double bz = inv(2, 1) * y + inv(2, 2);
    for (int x = 0; x < w; ++x) {
      const double z = inv(2, 0) * x + bz;
      double sx = (inv(0, 0) * x + bx) / z;
      double sy = (inv(1, 0) * x + by) / z;
      // Snap near-integer coordinates so exact transforms reproduce pixels exactly.
      if (std::abs(sx - std::round(sx)) < 1e-9) sx = std::round(sx);
      if (std::abs(sy - std::round(sy)) < 1e-9) sy = std::round(sy);
      if (!(sx >= 0 && sy >= 0 && sx <= xmax && sy <= ymax)) continue;
      const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, ht - 1);
      const double ax = sx - x0, ay = sy - y0;
      const std::uint8_t* r0 = prev.row(y0);
      const std::uint8_t* r1 = prev.row(y1);
      const double v = (r0[x0] * (1 - ax) + r0[x1] * ax) * (1 - ay) + (r1[x0] * (1 - ax) + r1[x1] * ax) * ay;
      dst[x] = static_cast<std::uint8_t>(v + 0.5);
      valid[x] = kMaskOn;
    }
  }
  return out;
}

double background_motion_term(std::span<const KeypointMatch> matches, const Homographyd& h) {
  double sum = 0;
  std::size_t count = 0;
  for (const auto& m : matches) {
    if (!m.tracked) continue;
    sum += (m.cur - h.apply(m.prev)).norm();
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::empty_input, "no tracked matches for background motion");
  return sum / double(count);
}

Alignment align_frames(const GrayImage& prev, const GrayImage& cur, const MotionCompensationParams& params) {
  if (!prev.same_shape(cur)) throw Error(ErrorCode::dimension_mismatch, "align_frames");
  Alignment out;
  const int cols = std::min(params.grid_cols, prev.width());
  const int rows = std::min(params.grid_rows, prev.height());
  const auto grid = sample_grid_keypoints(prev.width(), prev.height(), cols, rows);
  out.matches = track_keypoints(prev, cur, grid, params.lk);
  try {
    const HomographyFit fit = estimate_homography(out.matches, params.ransac);
    out.transform = fit.transform;
    for (std::size_t i = 0; i < out.matches.size(); ++i)
      if (fit.inliers[i]) out.inliers.push_back(out.matches[i]);
  } catch (const Error&) {
    out.transform = Homographyd::identity();
    out.fallback = true;
    for (const auto& m : out.matches)
      if (m.tracked) out.inliers.push_back(m);
  }
  out.background_motion = out.inliers.empty() ? 0.0 : background_motion_term(out.inliers, out.transform);
  return out;
}

}  // namespace mavdet
