#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mavdet/pipeline.hpp"

namespace mavdet::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNoInput = 2;

struct RunOptions {
  std::vector<std::string> inputs;
  std::string gt;
  /// "none", "oracle:<gt.csv>" or a shell command speaking the stdio protocol.
  std::string detector{"none"};
  /// "passthrough", "oracle:<gt.csv>" or a shell command.
  std::string classifier{"passthrough"};
  PipelineConfig pipeline;
  std::string out;
  bool annotate{false};
  bool timing{true};
  std::uint64_t seed{0};
  double oracle_dropout{0};
  double oracle_jitter{0};
  int request_timeout_ms{500};
  int repeat{1};
};

struct EvalOptions {
  std::vector<std::string> logs;
  std::vector<std::string> gts;
  std::vector<std::string> videos;
  std::string conditions;
  std::string out;
  double iou{0.5};
  bool json{false};
};

struct SynthOptions {
  std::string preset{"pan"};
  std::string out;
  std::optional<int> frames;
  std::optional<int> width;
  std::optional<int> height;
  std::optional<std::uint64_t> seed;
  std::optional<double> target_size;
  std::optional<double> speed_x;
  std::optional<double> speed_y;
  std::optional<int> contrast;
  std::optional<int> brightness_step;
  bool no_target{false};
};

int run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int bench(const RunOptions& opts, std::ostream& out, std::ostream& err);
int eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);
int synth(const SynthOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace mavdet::app
