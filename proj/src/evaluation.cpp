#include "mavdet/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "mavdet/error.hpp"

namespace mavdet {

namespace {

std::vector<std::size_t> confidence_order(std::span<const Detection> preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].confidence > preds[b].confidence; });
  return order;
}

int total_gt(std::span<const FrameRecord> frames) {
  int n = 0;
  for (const FrameRecord& f : frames) n += static_cast<int>(f.gts.size());
  return n;
}

}  // namespace

FrameMatch match_frame(std::span<const Detection> preds, std::span<const Box> gts, double iou_threshold) {
  FrameMatch out;
  out.matched.assign(preds.size(), false);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t i : confidence_order(preds)) {
    double best = iou_threshold;
    std::ptrdiff_t best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(preds[i].box, gts[g]);
      if (v > best) best = v, best_gt = static_cast<std::ptrdiff_t>(g);
    }
    if (best_gt >= 0) {
      taken[static_cast<std::size_t>(best_gt)] = true;
      out.matched[i] = true;
      ++out.counts.tp;
    } else {
      ++out.counts.fp;
    }
  }
  out.counts.fn = static_cast<int>(gts.size()) - out.counts.tp;
  return out;
}

double average_precision_11pt(std::span<const FrameRecord> frames, double iou_threshold) {
  const int n_gt = total_gt(frames);
  if (n_gt == 0) throw Error(ErrorCode::no_groundtruth, "no ground-truth boxes to evaluate against");

  // Greedy matching in confidence order is prefix-stable: filtering by a
  // threshold leaves the matches of the surviving predictions unchanged.
  std::vector<std::pair<double, bool>> scored;
  for (const FrameRecord& f : frames) {
    const FrameMatch m = match_frame(f.preds, f.gts, iou_threshold);
    for (std::size_t i = 0; i < f.preds.size(); ++i) scored.emplace_back(f.preds[i].confidence, m.matched[i]);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  struct Point {
    int tp, n;
  };
  std::vector<Point> points;
  int tp = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    tp += scored[i].second ? 1 : 0;
    if (i + 1 == scored.size() || scored[i + 1].first != scored[i].first)
      points.push_back({tp, static_cast<int>(i + 1)});
  }

  double sum = 0;
  for (int level = 0; level <= 10; ++level) {
    double best = 0;
    for (const Point& p : points)
      if (10LL * p.tp >= static_cast<long long>(level) * n_gt)
        best = std::max(best, static_cast<double>(p.tp) / p.n);
    sum += best;
  }
  return sum / 11.0;
}

Metrics metrics_from_counts(const MatchCounts& c) {
  Metrics m;
  m.counts = c;
  m.no_predictions = c.tp + c.fp == 0;
  m.no_groundtruth = c.tp + c.fn == 0;
  m.precision = m.no_predictions ? 0.0 : static_cast<double>(c.tp) / (c.tp + c.fp);
  m.recall = m.no_groundtruth ? 0.0 : static_cast<double>(c.tp) / (c.tp + c.fn);
  const double s = m.precision + m.recall;
  m.fscore = s > 0 ? 2 * m.precision * m.recall / s : 0.0;
  return m;
}

EvalReport evaluate(std::span<const FrameRecord> frames, double iou_threshold) {
  EvalReport report;
  MatchCounts all;
  std::map<std::string, MatchCounts> by_group;
  std::map<std::string, std::vector<FrameRecord>> grouped;
  for (const FrameRecord& f : frames) {
    const MatchCounts c = match_frame(f.preds, f.gts, iou_threshold).counts;
    all += c;
    if (!f.group.empty()) {
      by_group[f.group] += c;
      grouped[f.group].push_back(f);
    }
  }
  const auto finish = [&](const MatchCounts& c, std::span<const FrameRecord> subset) {
    Metrics m = metrics_from_counts(c);
    m.frames = static_cast<int>(subset.size());
    m.ap = total_gt(subset) > 0 ? average_precision_11pt(subset, iou_threshold) : 0.0;
    return m;
  };
  report.overall = finish(all, frames);
  for (const auto& [name, c] : by_group) report.groups[name] = finish(c, grouped[name]);
  return report;
}

std::vector<FrameRecord> make_records(const Predictions& preds, const GroundTruth& truth, const std::string& group) {
  std::set<int> keys;
  for (const auto& [k, _] : preds) keys.insert(k);
  for (const auto& [k, _] : truth) keys.insert(k);
  std::vector<FrameRecord> out;
  out.reserve(keys.size());
  for (int k : keys) {
    FrameRecord r;
    r.group = group;
    if (auto it = preds.find(k); it != preds.end()) r.preds = it->second;
    if (auto it = truth.find(k); it != truth.end()) r.gts = it->second;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mavdet
