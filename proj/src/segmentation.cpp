#include "mavdet/segmentation.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace mavdet {

void SegmentationConfig::validate() const {
  auto odd = [](int k) { return k >= 1 && k % 2 == 1; };
  if (t2 < 0 || min_area < 1 || d1 < 0 || !odd(open_kernel) || !odd(close_kernel) || close_iterations < 0)
    throw Error(ErrorCode::invalid_config, "segmentation config out of range");
}

DiffImage frame_difference(const GrayImage& cur, const WarpedImage& aligned_prev) {
  if (!cur.same_shape(aligned_prev.image) || !cur.same_shape(aligned_prev.valid))
    throw Error(ErrorCode::dimension_mismatch, "frame_difference");
  DiffImage out(cur.width(), cur.height());
  const auto a = cur.pixels(), b = aligned_prev.image.pixels(), v = aligned_prev.valid.pixels();
  auto d = out.pixels();
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = v[i] ? static_cast<std::uint8_t>(std::abs(int(a[i]) - int(b[i]))) : 0;
  return out;
}

DiffImage frame_difference(const GrayImage& cur, const GrayImage& aligned_prev) {
  if (!cur.same_shape(aligned_prev)) throw Error(ErrorCode::dimension_mismatch, "frame_difference");
  DiffImage out(cur.width(), cur.height());
  const auto a = cur.pixels(), b = aligned_prev.pixels();
  auto d = out.pixels();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<std::uint8_t>(std::abs(int(a[i]) - int(b[i])));
  return out;
}

double light_intensity_term(const GrayImage& cur, const GrayImage& prev_raw) {
  if (!cur.same_shape(prev_raw)) throw Error(ErrorCode::dimension_mismatch, "light_intensity_term");
  if (cur.empty()) throw Error(ErrorCode::invalid_dimensions, "empty image");
  const auto a = cur.pixels(), b = prev_raw.pixels();
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<std::uint64_t>(std::abs(int(a[i]) - int(b[i])));
  return double(sum) / double(a.size());
}

BinaryMask binarize(const DiffImage& diff, const SegmentationConfig& cfg, double light_term, double motion_term) {
  const double threshold = cfg.t2 + cfg.alpha * light_term + cfg.beta * motion_term;
  BinaryMask out(diff.width(), diff.height());
  const auto d = diff.pixels();
  auto m = out.pixels();
  for (std::size_t i = 0; i < d.size(); ++i) m[i] = d[i] > threshold ? kMaskOn : 0;
  return out;
}

namespace {

// Square structuring element via separable running counts. A pixel is set
// when at least `need` samples of its window are set; need = 1 dilates and
// need = window size erodes. Out-of-image samples count as `border`.
BinaryMask box_filter_binary(const BinaryMask& src, int kernel, bool erode_mode) {
  const int r = kernel / 2;
  const int w = src.width(), h = src.height();
  const int need = erode_mode ? kernel : 1;
  const int border = erode_mode ? 1 : 0;
  BinaryMask tmp(w, h), out(w, h);
  std::vector<int> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);

  for (int y = 0; y < h; ++y) {
    const std::uint8_t* s = src.row(y);
    prefix[0] = 0;
    for (int x = 0; x < w; ++x) prefix[static_cast<std::size_t>(x) + 1] = prefix[static_cast<std::size_t>(x)] + (s[x] != 0);
    std::uint8_t* d = tmp.row(y);
    for (int x = 0; x < w; ++x) {
      const int lo = x - r, hi = x + r;
      const int clo = std::max(lo, 0), chi = std::min(hi, w - 1);
      const int count = prefix[static_cast<std::size_t>(chi) + 1] - prefix[static_cast<std::size_t>(clo)] +
                        border * ((clo - lo) + (hi - chi));
      d[x] = count >= need ? kMaskOn : 0;
    }
  }
  // Vertical pass: sliding per-column counts over rows [y - r, y + r].
  std::vector<int> counts(static_cast<std::size_t>(w), 0);
  for (int y = 0; y <= std::min(r - 1, h - 1); ++y) {
    const std::uint8_t* t = tmp.row(y);
    for (int x = 0; x < w; ++x) counts[static_cast<std::size_t>(x)] += (t[x] != 0);
  }
  for (int y = 0; y < h; ++y) {
    if (y + r < h) {
      const std::uint8_t* t = tmp.row(y + r);
      for (int x = 0; x < w; ++x) counts[static_cast<std::size_t>(x)] += (t[x] != 0);
    }
    if (y - r - 1 >= 0) {
      const std::uint8_t* t = tmp.row(y - r - 1);
      for (int x = 0; x < w; ++x) counts[static_cast<std::size_t>(x)] -= (t[x] != 0);
    }
    const int outside = border * (std::max(0, r - y) + std::max(0, y + r - (h - 1)));
    std::uint8_t* d = out.row(y);
    for (int x = 0; x < w; ++x) d[x] = counts[static_cast<std::size_t>(x)] + outside >= need ? kMaskOn : 0;
  }
  return out;
}

struct DisjointSet {
  std::vector<int> parent;
  int make() {
    parent.push_back(static_cast<int>(parent.size()));
    return parent.back();
  }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int kernel) {
  return kernel <= 1 ? mask : box_filter_binary(mask, kernel, false);
}

BinaryMask erode(const BinaryMask& mask, int kernel) {
  return kernel <= 1 ? mask : box_filter_binary(mask, kernel, true);
}

BinaryMask morph_open(const BinaryMask& mask, int kernel) { return dilate(erode(mask, kernel), kernel); }

BinaryMask morph_close(const BinaryMask& mask, int kernel, int iterations) {
  BinaryMask out = mask;
  for (int i = 0; i < iterations; ++i) out = dilate(out, kernel);
  for (int i = 0; i < iterations; ++i) out = erode(out, kernel);
  return out;
}

std::vector<Component> label_components(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  DisjointSet sets;
  auto at = [&](int x, int y) -> int& { return labels[static_cast<std::size_t>(y) * w + x]; };

  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = mask.row(y);
    for (int x = 0; x < w; ++x) {
      if (!row[x]) continue;
      int label = -1;
      const int nx[4] = {x - 1, x - 1, x, x + 1};
      const int ny[4] = {y, y - 1, y - 1, y - 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= w || ny[k] < 0) continue;
        const int l = at(nx[k], ny[k]);
        if (l < 0) continue;
        if (label < 0) label = l;
        else sets.unite(label, l);
      }
      at(x, y) = label < 0 ? sets.make() : label;
    }
  }

  std::vector<int> slot(sets.parent.size(), -1);
  std::vector<Component> comps;
  std::vector<int> x1s, y1s;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int l = at(x, y);
      if (l < 0) continue;
      const int root = sets.find(l);
      int& s = slot[static_cast<std::size_t>(root)];
      if (s < 0) {
        s = static_cast<int>(comps.size());
        comps.push_back({{x, y, 1, 1}, 0});
        x1s.push_back(x);
        y1s.push_back(y);
      }
      Component& c = comps[static_cast<std::size_t>(s)];
      c.bounds.x = std::min(c.bounds.x, x);
      c.bounds.y = std::min(c.bounds.y, y);
      x1s[static_cast<std::size_t>(s)] = std::max(x1s[static_cast<std::size_t>(s)], x);
      y1s[static_cast<std::size_t>(s)] = std::max(y1s[static_cast<std::size_t>(s)], y);
      ++c.pixel_count;
    }
  for (std::size_t i = 0; i < comps.size(); ++i) {
    comps[i].bounds.w = x1s[i] - comps[i].bounds.x + 1;
    comps[i].bounds.h = y1s[i] - comps[i].bounds.y + 1;
  }
  return comps;
}

std::vector<Box> merge_boxes(std::vector<Box> boxes, double distance) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < boxes.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        if (gap_distance(boxes[i], boxes[j]) < distance) {
          boxes[i] = unite(boxes[i], boxes[j]);
          boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
          break;
        }
      }
  }
  std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return boxes;
}

std::vector<Box> extract_candidates(const BinaryMask& mask, const SegmentationConfig& cfg) {
  BinaryMask cleaned = morph_open(mask, cfg.open_kernel);
  cleaned = morph_close(cleaned, cfg.close_kernel, cfg.close_iterations);
  std::vector<Box> boxes;
  for (const auto& c : label_components(cleaned))
    if (c.pixel_count >= cfg.min_area) boxes.push_back(to_box(c.bounds));
  return merge_boxes(std::move(boxes), cfg.d1);
}

}  // namespace mavdet
