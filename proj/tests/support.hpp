#pragma once

#include <cstdint>
#include <random>

#include "mavdet/image.hpp"
#include "mavdet/synthetic.hpp"

namespace mavdet::testing {

/// Smooth textured gray image with no target.
inline GrayImage textured_gray(int width, int height, std::uint64_t seed = 7) {
  SceneConfig c;
  c.frames = 1;
  c.width = width;
  c.height = height;
  c.seed = seed;
  c.target.reset();
  return to_grayscale(generate(c).frames.front());
}

inline BinaryMask random_mask(int width, int height, double density, std::mt19937_64& rng) {
  BinaryMask m(width, height);
  std::bernoulli_distribution on(density);
  for (auto& v : m.pixels()) v = on(rng) ? kMaskOn : 0;
  return m;
}

inline Frame gray_frame(int index, const GrayImage& g) { return {index, gray_to_rgb(g)}; }

}  // namespace mavdet::testing
