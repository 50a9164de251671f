#pragma once

#include <vector>

#include "mavdet/image.hpp"
#include "mavdet/motion_compensation.hpp"

namespace mavdet {

struct SegmentationConfig {
  double t2 = 5.0;     ///< base binarization threshold
  double alpha = 1.0;  ///< light-intensity coefficient
  double beta = 1.0;   ///< background-motion coefficient
  int min_area = 30;   ///< pixels; smaller components are dropped
  double d1 = 15.0;    ///< boxes closer than this are merged
  int open_kernel = 3;
  int close_kernel = 7;
  int close_iterations = 2;

  void validate() const;
};

/// |cur - aligned_prev| per pixel; pixels outside `aligned_prev.valid` are 0.
DiffImage frame_difference(const GrayImage& cur, const WarpedImage& aligned_prev);
DiffImage frame_difference(const GrayImage& cur, const GrayImage& aligned_prev);

/// Mean absolute difference of the raw (unwarped) pair over every pixel.
double light_intensity_term(const GrayImage& cur, const GrayImage& prev_raw);

/// 255 where diff > t2 + alpha * light + beta * motion.
BinaryMask binarize(const DiffImage& diff, const SegmentationConfig& cfg, double light_term,
                    double motion_term);

BinaryMask dilate(const BinaryMask& mask, int kernel);
BinaryMask erode(const BinaryMask& mask, int kernel);
BinaryMask morph_open(const BinaryMask& mask, int kernel);
/// `iterations` dilations followed by as many erosions.
BinaryMask morph_close(const BinaryMask& mask, int kernel, int iterations = 1);

struct Component {
  PixelRect bounds;
  int pixel_count{0};
};

/// 8-connected components of the set pixels.
std::vector<Component> label_components(const BinaryMask& mask);

/// Merges boxes whose edge-to-edge gap is below `distance`, to a fixpoint.
std::vector<Box> merge_boxes(std::vector<Box> boxes, double distance);

/// Open, close, label, drop small components, box and merge.
std::vector<Box> extract_candidates(const BinaryMask& mask, const SegmentationConfig& cfg);

}  // namespace mavdet
