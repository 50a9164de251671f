#include "mavdet/bench.hpp"

#include <cmath>

namespace mavdet {

namespace {

struct Accum {
  int n{0};
  double sum{0};
};

}  // namespace

const std::vector<std::string>& bench_stage_names() {
  static const std::vector<std::string> names{"GAD", "GMD", "LAD", "LMD", "track"};
  return names;
}

BenchRow summarize_run(std::span<const std::vector<FrameTiming>> inputs) {
  BenchRow row;
  double total_ms = 0;
  std::map<std::string, Accum> acc;
  for (const std::string& name : bench_stage_names()) acc[name];
  for (const auto& frames : inputs)
    for (const FrameTiming& f : frames) {
      ++row.frames;
      total_ms += f.total_ms;
      for (const auto& [name, ms] : f.stages_ms) {
        Accum& a = acc[name];
        ++a.n;
        a.sum += ms;
      }
    }
  row.seconds = total_ms / 1000.0;
  row.fps = row.seconds > 0 ? row.frames / row.seconds : 0.0;
  for (const auto& [name, a] : acc) row.stages[name] = {a.n, a.n > 0 ? a.sum / a.n : 0.0};
  return row;
}

BenchSummary summarize_bench(std::span<const BenchRow> rows) {
  BenchSummary s;
  s.rows.assign(rows.begin(), rows.end());
  if (rows.empty()) return s;
  double sum = 0;
  std::map<std::string, Accum> acc;
  for (const BenchRow& r : rows) {
    sum += r.fps;
    for (const auto& [name, st] : r.stages) {
      Accum& a = acc[name];
      a.n += st.samples;
      a.sum += st.mean_ms * st.samples;
    }
  }
  s.fps_mean = sum / rows.size();
  if (rows.size() > 1) {
    double ss = 0;
    for (const BenchRow& r : rows) ss += (r.fps - s.fps_mean) * (r.fps - s.fps_mean);
    s.fps_stddev = std::sqrt(ss / (rows.size() - 1));
  }
  for (const auto& [name, a] : acc) s.stages[name] = {a.n, a.n > 0 ? a.sum / a.n : 0.0};
  return s;
}

}  // namespace mavdet
