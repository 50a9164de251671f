#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace mavdet {

/// Wall time of one processed frame and of each stage that ran in it.
struct FrameTiming {
  double total_ms{0};
  std::map<std::string, double> stages_ms;
};

struct StageStat {
  int samples{0};
  double mean_ms{0};
};

struct BenchRow {
  int frames{0};
  double seconds{0};
  double fps{0};  ///< frames / seconds over every input of the run
  std::map<std::string, StageStat> stages;
};

struct BenchSummary {
  std::vector<BenchRow> rows;
  double fps_mean{0};
  double fps_stddev{0};  ///< sample standard deviation; 0 for a single row
  std::map<std::string, StageStat> stages;  ///< pooled over all rows
};

/// One run over all inputs; average FPS is total frames over total time.
BenchRow summarize_run(std::span<const std::vector<FrameTiming>> inputs);
BenchSummary summarize_bench(std::span<const BenchRow> rows);

/// Names that always appear in tables, in display order.
const std::vector<std::string>& bench_stage_names();

}  // namespace mavdet
