#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mavdet/annotations.hpp"
#include "mavdet/appearance.hpp"

namespace mavdet {

struct MatchCounts {
  int tp{0};
  int fp{0};
  int fn{0};

  MatchCounts& operator+=(const MatchCounts& o) {
    tp += o.tp, fp += o.fp, fn += o.fn;
    return *this;
  }
};

struct FrameMatch {
  MatchCounts counts;
  /// Parallel to the predictions given: true where the prediction is a TP.
  std::vector<bool> matched;
};

/// Greedy one-to-one matching in descending confidence (stable for ties).
/// A prediction takes the unmatched ground truth of highest IOU when that IOU
/// is strictly above `iou_threshold`.
FrameMatch match_frame(std::span<const Detection> preds, std::span<const Box> gts, double iou_threshold = 0.5);

/// Predictions and ground truth of one frame; `group` labels the frame for the
/// per-condition breakdown and may be empty.
struct FrameRecord {
  std::vector<Detection> preds;
  std::vector<Box> gts;
  std::string group;
};

/// 11-point interpolated AP over every distinct confidence threshold.
/// Throws no_groundtruth when the records contain no ground-truth box.
double average_precision_11pt(std::span<const FrameRecord> frames, double iou_threshold = 0.5);

struct Metrics {
  MatchCounts counts;
  double precision{0};
  double recall{0};
  double fscore{0};
  double ap{0};
  int frames{0};
  /// Zero-denominator flags; the affected ratios are reported as 0.
  bool no_predictions{false};
  bool no_groundtruth{false};

  bool empty() const { return no_predictions && no_groundtruth; }
};

/// Ratios from counts, with 0 for an empty denominator. `ap` is left at 0.
Metrics metrics_from_counts(const MatchCounts& c);

struct EvalReport {
  Metrics overall;
  std::map<std::string, Metrics> groups;
};

EvalReport evaluate(std::span<const FrameRecord> frames, double iou_threshold = 0.5);

using Predictions = std::map<int, std::vector<Detection>>;

/// One record per frame index present in either map.
std::vector<FrameRecord> make_records(const Predictions& preds, const GroundTruth& truth,
                                      const std::string& group = {});

}  // namespace mavdet
