#include "mavdet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "mavdet/appearance.hpp"
#include "mavdet/error.hpp"
#include "mavdet/image_io.hpp"

namespace mavdet {

namespace {

constexpr double kMaxRasterPixels = 64e6;

double uniform_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

/// Lattice value in [-1, 1] that depends only on the world cell.
double lattice(std::uint64_t seed, std::int64_t i, std::int64_t j) {
  return 2.0 * uniform_unit(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(i)), static_cast<std::uint64_t>(j))) -
         1.0;
}

double quintic(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3 - 2 * t);
}

/// World-space texture sampled at integer positions of a bounded window.
struct Raster {
  double x0{0}, y0{0};
  int w{0}, h{0};
  std::vector<float> v;

  float& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  float at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }

  double sample(double wx, double wy) const {
    const double fx = std::clamp(wx - x0, 0.0, w - 1.0), fy = std::clamp(wy - y0, 0.0, h - 1.0);
    const int ix = std::min(static_cast<int>(fx), w - 2), iy = std::min(static_cast<int>(fy), h - 2);
    const double ax = fx - ix, ay = fy - iy;
    const double top = at(ix, iy) * (1 - ax) + at(ix + 1, iy) * ax;
    const double bot = at(ix, iy + 1) * (1 - ax) + at(ix + 1, iy + 1) * ax;
    return top * (1 - ay) + bot * ay;
  }
};

void add_value_noise(Raster& r, std::uint64_t seed, double period, double amplitude) {
  const auto i0 = static_cast<std::int64_t>(std::floor(r.x0 / period));
  const auto j0 = static_cast<std::int64_t>(std::floor(r.y0 / period));
  const int nx = static_cast<int>(std::floor((r.x0 + r.w) / period) - i0) + 2;
  const int ny = static_cast<int>(std::floor((r.y0 + r.h) / period) - j0) + 2;
  std::vector<double> grid(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) grid[static_cast<std::size_t>(j) * nx + i] = lattice(seed, i0 + i, j0 + j);

  std::vector<int> cx(r.w);
  std::vector<double> tx(r.w);
  for (int x = 0; x < r.w; ++x) {
    const double u = (r.x0 + x) / period;
    const double fl = std::floor(u);
    cx[x] = static_cast<int>(static_cast<std::int64_t>(fl) - i0);
    tx[x] = quintic(u - fl);
  }
  for (int y = 0; y < r.h; ++y) {
    const double v = (r.y0 + y) / period;
    const double fl = std::floor(v);
    const int cy = static_cast<int>(static_cast<std::int64_t>(fl) - j0);
    const double ty = quintic(v - fl);
    const double* g0 = &grid[static_cast<std::size_t>(cy) * nx];
    const double* g1 = g0 + nx;
    for (int x = 0; x < r.w; ++x) {
      const int c = cx[x];
      const double top = g0[c] + (g0[c + 1] - g0[c]) * tx[x];
      const double bot = g1[c] + (g1[c + 1] - g1[c]) * tx[x];
      r.at(x, y) += static_cast<float>(amplitude * (top + (bot - top) * ty));
    }
  }
}

void add_octaves(Raster& r, const SceneConfig& cfg, double amplitude, std::uint64_t salt) {
  double total = 0;
  for (double p : cfg.texture_periods) total += std::sqrt(p);
  for (std::size_t k = 0; k < cfg.texture_periods.size(); ++k) {
    const double p = cfg.texture_periods[k];
    add_value_noise(r, mix_seed(cfg.seed ^ salt, k), p, amplitude * std::sqrt(p) / total);
  }
}

void add_checker(Raster& r, double cell, double amplitude) {
  const double k = std::numbers::pi / cell;
  for (int y = 0; y < r.h; ++y) {
    const double sy = std::sin(k * (r.y0 + y));
    for (int x = 0; x < r.w; ++x)
      r.at(x, y) += static_cast<float>(amplitude * std::tanh(3.0 * std::sin(k * (r.x0 + x)) * sy));
  }
}

void add_structures(Raster& r, const SceneConfig& cfg) {
  std::mt19937_64 rng(mix_seed(cfg.seed, 0x5eedULL));
  const double a = cfg.texture_amplitude;
  std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
  const double phi = angle(rng);
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) {
      const double s = (r.x0 + x) * std::cos(phi) + (r.y0 + y) * std::sin(phi);
      r.at(x, y) += static_cast<float>(0.4 * a * std::sin(2 * std::numbers::pi * s / 2000.0));
    }
  add_octaves(r, cfg, 0.3 * a, 0x57ULL);

  const int count = std::max(1, static_cast<int>(static_cast<double>(r.w) * r.h / 20000.0));
  std::uniform_real_distribution<double> px(0, r.w), py(0, r.h), side(20, 80), level(-0.6 * a, 0.6 * a);
  std::bernoulli_distribution round(0.4);
  for (int n = 0; n < count; ++n) {
    const double cx = px(rng), cy = py(rng), hw = side(rng) / 2, hh = side(rng) / 2, lv = level(rng);
    const bool disc = round(rng);
    const int xa = std::max(0, static_cast<int>(cx - hw - 3)), xb = std::min(r.w - 1, static_cast<int>(cx + hw + 3));
    const int ya = std::max(0, static_cast<int>(cy - hh - 3)), yb = std::min(r.h - 1, static_cast<int>(cy + hh + 3));
    for (int y = ya; y <= yb; ++y)
      for (int x = xa; x <= xb; ++x) {
        // Signed distance outside the shape, negative inside.
        const double d = disc ? std::hypot((x - cx) / hw, (y - cy) / hh) * std::min(hw, hh) - std::min(hw, hh)
                              : std::max(std::abs(x - cx) - hw, std::abs(y - cy) - hh);
        r.at(x, y) += static_cast<float>(lv * (1.0 - smoothstep(-1.5, 1.5, d)));
      }
  }
}

Raster render_background(const SceneConfig& cfg, double x0, double y0, int w, int h) {
  Raster r{x0, y0, w, h, std::vector<float>(static_cast<std::size_t>(w) * h, static_cast<float>(cfg.background_mean))};
  switch (cfg.background) {
    case BackgroundType::noise:
      add_octaves(r, cfg, cfg.texture_amplitude, 0);
      break;
    case BackgroundType::checker:
      add_checker(r, 32.0, 0.8 * cfg.texture_amplitude);
      add_octaves(r, cfg, 0.2 * cfg.texture_amplitude, 0xc4ULL);
      break;
    case BackgroundType::structures:
      add_structures(r, cfg);
      break;
    case BackgroundType::textureless:
      break;
  }
  return r;
}

double reflect(double x, double lo, double hi) {
  if (hi <= lo) return lo;
  const double span = hi - lo;
  double t = std::fmod(x - lo, 2 * span);
  if (t < 0) t += 2 * span;
  return lo + (t <= span ? t : 2 * span - t);
}

CameraMotion draw_motion(const CameraMotion& base, const CameraMotion& spread, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CameraMotion m = base;
  m.tx += spread.tx * u(rng);
  m.ty += spread.ty * u(rng);
  m.rotation_deg += spread.rotation_deg * u(rng);
  m.zoom += spread.zoom * u(rng);
  m.tilt_x += spread.tilt_x * u(rng);
  m.tilt_y += spread.tilt_y * u(rng);
  return m;
}

struct TargetPath {
  std::vector<Point2d> centers;  ///< box convention
};

Point2d carry(const Homographyd& h, const Point2d& center) {
  const Point2d half(0.5, 0.5);
  return h.apply(center - half) + half;
}

TargetPath plan_target(const TargetConfig& t, const SceneConfig& cfg, const std::vector<Homographyd>& world_to_image,
                       const std::vector<Homographyd>& steps) {
  TargetPath path;
  const Point2d start = t.start.value_or(Point2d(cfg.width / 2.0, cfg.height / 2.0));
  const double margin = 1.5 * t.size;
  if (t.anchor == Anchor::relative) {
    const double lo[2] = {margin, margin}, hi[2] = {cfg.width - margin, cfg.height - margin};
    Point2d v = t.velocity, c = start;
    path.centers.push_back(c);
    for (int n = 1; n < cfg.frames; ++n) {
      const Point2d carried = carry(steps[static_cast<std::size_t>(n)], c);
      for (int a = 0; a < 2; ++a) {
        if (carried[a] + v[a] < lo[a] || carried[a] + v[a] > hi[a]) v[a] = -v[a];
        c[a] = std::clamp(carried[a] + v[a], lo[a], hi[a]);
      }
      path.centers.push_back(c);
    }
    return path;
  }
  for (int n = 0; n < cfg.frames; ++n) {
    const Point2d p = start + t.velocity * static_cast<double>(n);
    if (t.anchor == Anchor::image) {
      path.centers.emplace_back(reflect(p.x(), margin, cfg.width - margin), reflect(p.y(), margin, cfg.height - margin));
    } else {
      path.centers.push_back(carry(world_to_image[static_cast<std::size_t>(n)], p));
    }
  }
  return path;
}

/// Paints the textured silhouette; returns the tight box of painted pixels.
std::optional<Box> paint_target(std::vector<double>& img, int width, int height, const TargetConfig& t,
                                const Point2d& center, int mean) {
  const double r = t.size / 2;
  const double reach = r * std::numbers::sqrt2 + 1;
  const int xa = std::max(0, static_cast<int>(std::floor(center.x() - reach)));
  const int xb = std::min(width - 1, static_cast<int>(std::ceil(center.x() + reach)));
  const int ya = std::max(0, static_cast<int>(std::floor(center.y() - reach)));
  const int yb = std::min(height - 1, static_cast<int>(std::ceil(center.y() + reach)));
  const double c = std::cos(t.angle_deg * std::numbers::pi / 180), s = std::sin(t.angle_deg * std::numbers::pi / 180);
  int minx = width, miny = height, maxx = -1, maxy = -1;
  for (int y = ya; y <= yb; ++y)
    for (int x = xa; x <= xb; ++x) {
      const double dx = x + 0.5 - center.x(), dy = y + 0.5 - center.y();
      const double lx = c * dx + s * dy, ly = -s * dx + c * dy;
      const bool inside = t.shape == TargetShape::disc ? lx * lx + ly * ly <= r * r
                                                       : std::abs(lx) <= r && std::abs(ly) <= r;
      if (!inside) continue;
      const auto cx = static_cast<long>(std::floor((lx + t.size) / t.cell));
      const auto cy = static_cast<long>(std::floor((ly + t.size) / t.cell));
      img[static_cast<std::size_t>(y) * width + x] = mean + t.contrast + (((cx + cy) & 1) ? t.texture : 0);
      minx = std::min(minx, x), maxx = std::max(maxx, x);
      miny = std::min(miny, y), maxy = std::max(maxy, y);
    }
  if (maxx < 0) return std::nullopt;
  return Box{double(minx), double(miny), double(maxx - minx + 1), double(maxy - miny + 1)};
}

nlohmann::json motion_json(const CameraMotion& m) {
  return {{"tx", m.tx}, {"ty", m.ty}, {"rotation_deg", m.rotation_deg},
          {"zoom", m.zoom}, {"tilt_x", m.tilt_x}, {"tilt_y", m.tilt_y}};
}

}  // namespace

Homographyd camera_homography(const CameraMotion& m, int width, int height) {
  using Matrix = Homographyd::Matrix;
  const double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
  const double a = m.rotation_deg * std::numbers::pi / 180, s = 1.0 + m.zoom;
  Matrix to_center = Matrix::Identity(), back = Matrix::Identity(), rot = Matrix::Identity(),
         tilt = Matrix::Identity();
  to_center(0, 2) = -cx, to_center(1, 2) = -cy;
  back(0, 2) = cx + m.tx, back(1, 2) = cy + m.ty;
  rot << s * std::cos(a), -s * std::sin(a), 0, s * std::sin(a), s * std::cos(a), 0, 0, 0, 1;
  tilt(2, 0) = m.tilt_x, tilt(2, 1) = m.tilt_y;
  return Homographyd(Matrix(back * rot * tilt * to_center));
}

void SceneConfig::validate() const {
  const auto bad = [](const std::string& what) { throw Error(ErrorCode::invalid_config, what); };
  if (frames <= 0) bad("scene needs at least one frame");
  if (width < 16 || height < 16) bad("scene dimensions must be at least 16x16");
  if (texture_periods.empty() && background == BackgroundType::noise) bad("noise background needs texture periods");
  for (double p : texture_periods)
    if (!(p >= 1)) bad("texture periods must be >= 1");
  if (!(texture_amplitude >= 0)) bad("texture amplitude must be >= 0");
  if (brightness_max_step < 0) bad("brightness step must be >= 0");
  for (const auto* t : {&target, &second_mover}) {
    if (!*t) continue;
    if (!((*t)->size >= 1)) bad("target size must be >= 1");
    if ((*t)->cell < 1) bad("target checker cell must be >= 1");
    if (3 * (*t)->size >= std::min(width, height)) bad("target too large for the frame");
  }
  if (flicker_patches < 0 || flicker_size < 1) bad("invalid flicker patch settings");
}

Scene generate(const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  Scene scene;
  SceneTruth& truth = scene.truth;
  const int n = cfg.frames, width = cfg.width, height = cfg.height;

  // world_to_image[k] maps world (frame 0) coordinates into frame k.
  std::vector<Homographyd> world_to_image{Homographyd::identity()};
  truth.homographies.push_back(Homographyd::identity());
  truth.motions.push_back({});
  for (int k = 1; k < n; ++k) {
    const CameraMotion m = draw_motion(cfg.camera, cfg.camera_random, rng);
    const Homographyd h = camera_homography(m, width, height);
    truth.motions.push_back(m);
    truth.homographies.push_back(h);
    world_to_image.push_back(h * world_to_image.back());
  }

  std::vector<Homographyd> image_to_world;
  double minx = 0, miny = 0, maxx = width, maxy = height;
  for (const Homographyd& w : world_to_image) {
    const Homographyd inv = w.inverse();
    if (!inv.finite()) throw Error(ErrorCode::invalid_config, "camera path is singular");
    for (const Point2d& c : {Point2d(-1, -1), Point2d(width, -1), Point2d(-1, height), Point2d(width, height)}) {
      const double den = inv(2, 0) * c.x() + inv(2, 1) * c.y() + inv(2, 2);
      if (!(den > 1e-6)) throw Error(ErrorCode::invalid_config, "camera path maps the frame past infinity");
      const Point2d p = inv.apply(c);
      minx = std::min(minx, p.x()), maxx = std::max(maxx, p.x());
      miny = std::min(miny, p.y()), maxy = std::max(maxy, p.y());
    }
    image_to_world.push_back(inv);
  }
  const double x0 = std::floor(minx) - 2, y0 = std::floor(miny) - 2;
  const double rw = std::ceil(maxx) + 3 - x0, rh = std::ceil(maxy) + 3 - y0;
  if (rw * rh > kMaxRasterPixels) throw Error(ErrorCode::invalid_config, "camera path covers too much ground");
  const Raster bg = render_background(cfg, x0, y0, static_cast<int>(rw), static_cast<int>(rh));

  std::optional<TargetPath> target_path, mover_path;
  if (cfg.target) target_path = plan_target(*cfg.target, cfg, world_to_image, truth.homographies);
  if (cfg.second_mover) mover_path = plan_target(*cfg.second_mover, cfg, world_to_image, truth.homographies);

  std::uniform_real_distribution<double> fx(0.1 * width, 0.9 * width), fy(0.1 * height, 0.9 * height);
  std::vector<Point2d> flicker;
  for (int k = 0; k < cfg.flicker_patches; ++k) flicker.emplace_back(fx(rng), fy(rng));
  std::bernoulli_distribution coin(0.5);
  const int half_step = cfg.brightness_max_step / 2;
  std::uniform_int_distribution<int> offset(-half_step, half_step);

  std::vector<double> img(static_cast<std::size_t>(width) * height);
  for (int k = 0; k < n; ++k) {
    const Homographyd::Matrix& m = image_to_world[static_cast<std::size_t>(k)].matrix();
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double w = m(2, 0) * x + m(2, 1) * y + m(2, 2);
        const double u = (m(0, 0) * x + m(0, 1) * y + m(0, 2)) / w;
        const double v = (m(1, 0) * x + m(1, 1) * y + m(1, 2)) / w;
        img[static_cast<std::size_t>(y) * width + x] = bg.sample(u, v);
      }
    }

    for (const Point2d& p : flicker) {
      const Point2d c = world_to_image[static_cast<std::size_t>(k)].apply(p);
      const double amp = coin(rng) ? cfg.flicker_amplitude : -cfg.flicker_amplitude;
      const int xa = static_cast<int>(std::lround(c.x() - cfg.flicker_size / 2.0));
      const int ya = static_cast<int>(std::lround(c.y() - cfg.flicker_size / 2.0));
      for (int y = std::max(0, ya); y < std::min(height, ya + cfg.flicker_size); ++y)
        for (int x = std::max(0, xa); x < std::min(width, xa + cfg.flicker_size); ++x)
          img[static_cast<std::size_t>(y) * width + x] += amp;
    }
    if (mover_path)
      paint_target(img, width, height, *cfg.second_mover, mover_path->centers[static_cast<std::size_t>(k)],
                   cfg.background_mean);
    std::optional<Box> box;
    if (target_path)
      box = paint_target(img, width, height, *cfg.target, target_path->centers[static_cast<std::size_t>(k)],
                         cfg.background_mean);

    const int brightness = half_step > 0 ? offset(rng) : 0;
    RgbImage rgb(width, height);
    for (int y = 0; y < height; ++y) {
      std::uint8_t* row = rgb.row(y);
      for (int x = 0; x < width; ++x) {
        const double val = std::round(img[static_cast<std::size_t>(y) * width + x]) + brightness;
        const auto g = static_cast<std::uint8_t>(std::clamp(val, 0.0, 255.0));
        row[3 * x] = row[3 * x + 1] = row[3 * x + 2] = g;
      }
    }
    scene.frames.push_back({k, std::move(rgb)});
    truth.boxes.push_back(box);
    truth.brightness.push_back(brightness);
    if (target_path) {
      truth.centers.emplace_back(target_path->centers[static_cast<std::size_t>(k)]);
    } else {
      truth.centers.emplace_back(std::nullopt);
    }
    const bool moving = k > 0 && target_path;
    truth.velocities.push_back(moving ? Point2d(*truth.centers[k] - *truth.centers[k - 1]) : Point2d(0, 0));
    truth.relative_velocities.push_back(
        moving ? Point2d(*truth.centers[k] - carry(truth.homographies[k], *truth.centers[k - 1])) : Point2d(0, 0));
  }
  return scene;
}

GroundTruth ground_truth(const SceneTruth& truth) {
  GroundTruth gt;
  for (std::size_t k = 0; k < truth.boxes.size(); ++k)
    if (truth.boxes[k]) gt[static_cast<int>(k)].push_back(*truth.boxes[k]);
  return gt;
}

std::vector<std::string> scene_preset_names() {
  return {"pan", "static", "orbit", "tilt", "checker", "structures", "textureless", "brightness", "distractors",
          "hd"};
}

SceneConfig scene_preset(const std::string& name) {
  SceneConfig c;
  c.camera_random = {0.3, 0.3, 0.05, 0.0005, 0, 0};
  if (name == "pan") {
    c.camera = {2.0, 1.0, 0, 0, 0, 0};
  } else if (name == "static") {
    c.camera_random = {};
  } else if (name == "orbit") {
    c.camera = {1.0, 0, 0.3, 0.002, 0, 0};
  } else if (name == "tilt") {
    c.camera = {1.5, 0.5, 0, 0, 2e-6, 1e-6};
  } else if (name == "checker") {
    c.background = BackgroundType::checker;
    c.camera = {2.0, 1.0, 0, 0, 0, 0};
  } else if (name == "structures") {
    c.background = BackgroundType::structures;
    c.camera = {2.0, 1.0, 0, 0, 0, 0};
  } else if (name == "textureless") {
    c.background = BackgroundType::textureless;
    c.camera_random = {};
  } else if (name == "brightness") {
    c.camera = {2.0, 1.0, 0, 0, 0, 0};
    c.target.reset();
    c.brightness_max_step = 40;
  } else if (name == "distractors") {
    c.camera = {2.0, 1.0, 0, 0, 0, 0};
    TargetConfig mover;
    mover.size = 10;
    mover.start = Point2d(120, 100);
    mover.velocity = {-2.5, 2.0};
    mover.contrast = 70;
    c.second_mover = mover;
    c.flicker_patches = 3;
  } else if (name == "hd") {
    c.width = 1920;
    c.height = 1080;
    c.camera = {2.0, 1.0, 0, 0, 0, 0};
  } else {
    throw Error(ErrorCode::invalid_config, "unknown scene preset: " + name);
  }
  return c;
}

void write_scene(const std::filesystem::path& dir, const Scene& scene, const SceneConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
  char name[32];
  for (const Frame& f : scene.frames) {
    std::snprintf(name, sizeof name, "%06d.png", f.index);
    write_png(dir / name, f.rgb);
  }
  write_annotations_csv(dir / "gt.csv", ground_truth(scene.truth));

  const SceneTruth& t = scene.truth;
  nlohmann::json j;
  j["width"] = config.width;
  j["height"] = config.height;
  j["frames"] = config.frames;
  j["seed"] = config.seed;
  auto& frames = j["per_frame"] = nlohmann::json::array();
  for (std::size_t k = 0; k < t.boxes.size(); ++k) {
    nlohmann::json f;
    f["frame"] = k;
    const auto& m = t.homographies[k].matrix();
    f["homography"] = {m(0, 0), m(0, 1), m(0, 2), m(1, 0), m(1, 1), m(1, 2), m(2, 0), m(2, 1), m(2, 2)};
    f["motion"] = motion_json(t.motions[k]);
    f["velocity"] = {t.velocities[k].x(), t.velocities[k].y()};
    f["relative_velocity"] = {t.relative_velocities[k].x(), t.relative_velocities[k].y()};
    f["center"] = t.centers[k] ? nlohmann::json{t.centers[k]->x(), t.centers[k]->y()} : nlohmann::json();
    f["brightness"] = t.brightness[k];
    frames.push_back(std::move(f));
  }
  std::ofstream out(dir / "truth.json");
  out << j.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::io_error, "cannot write truth.json in " + dir.string());
}

}  // namespace mavdet
