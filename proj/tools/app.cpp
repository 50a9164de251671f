#include "app.hpp"

#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mavdet/bench.hpp"
#include "mavdet/detection_log.hpp"
#include "mavdet/error.hpp"
#include "mavdet/image_io.hpp"
#include "mavdet/process_backend.hpp"
#include "mavdet/synthetic.hpp"

namespace mavdet::app {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::string_view kOraclePrefix = "oracle:";

template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> items_;
  bool closed_{false};
};

struct Backends {
  std::unique_ptr<AppearanceDetector> detector;
  std::unique_ptr<PatchClassifier> classifier;
};

std::optional<std::string> oracle_path(const std::string& arg) {
  if (arg.rfind(kOraclePrefix, 0) != 0) return std::nullopt;
  return arg.substr(kOraclePrefix.size());
}

Backends make_backends(const RunOptions& o) {
  Backends b;
  ExternalBackendOptions ext;
  ext.request_timeout_ms = o.request_timeout_ms;
  if (o.detector.empty() || o.detector == "none") {
    b.detector = std::make_unique<NullDetector>();
  } else if (auto path = oracle_path(o.detector)) {
    OracleDetectorOptions opt;
    opt.dropout = o.oracle_dropout;
    opt.jitter_sigma = o.oracle_jitter;
    opt.seed = o.seed;
    b.detector = std::make_unique<OracleDetector>(read_annotations(*path), opt);
  } else {
    b.detector = std::make_unique<ExternalDetector>(o.detector, ext);
  }
  if (o.classifier.empty() || o.classifier == "passthrough") {
    b.classifier = std::make_unique<PassThroughClassifier>();
  } else if (auto path = oracle_path(o.classifier)) {
    b.classifier = std::make_unique<OracleClassifier>(read_annotations(*path));
  } else {
    b.classifier = std::make_unique<ExternalClassifier>(o.classifier, ext);
  }
  return b;
}

json run_config_json(const RunOptions& o, const std::string& input) {
  const PipelineConfig& p = o.pipeline;
  const SegmentationConfig& s = p.segmentation;
  const MotionClassifierConfig& m = p.motion_classifier;
  return {
      {"input", input},
      {"gt", o.gt},
      {"detector", o.detector},
      {"classifier", o.classifier},
      {"seed", o.seed},
      {"annotate", o.annotate},
      {"oracle", {{"dropout", o.oracle_dropout}, {"jitter", o.oracle_jitter}}},
      {"request_timeout_ms", o.request_timeout_ms},
      {"parameters",
       {{"t0", p.detector.t0}, {"t1", p.detector.t1}, {"t2", s.t2}, {"t3", m.t3}, {"t4", m.t4}, {"t5", m.t5},
        {"d1", s.d1}, {"alpha", s.alpha}, {"beta", s.beta}}},
      {"segmentation",
       {{"min_area", s.min_area}, {"open_kernel", s.open_kernel}, {"close_kernel", s.close_kernel},
        {"close_iterations", s.close_iterations}}},
      {"tracking",
       {{"lost_limit", p.lost_limit}, {"region_base", p.region_base}, {"region_growth", p.region_growth},
        {"kalman_q", p.kalman_q}, {"kalman_r", p.kalman_r}, {"kalman_p0", p.kalman_p0},
        {"select_radius_factor", p.select_radius_factor}}},
  };
}

json metrics_json(const Metrics& m) {
  return {{"tp", m.counts.tp},          {"fp", m.counts.fp},
          {"fn", m.counts.fn},          {"precision", m.precision},
          {"recall", m.recall},         {"fscore", m.fscore},
          {"ap", m.ap},                 {"frames", m.frames},
          {"no_predictions", m.no_predictions}, {"no_groundtruth", m.no_groundtruth}};
}

json report_json(const EvalReport& r) {
  json j{{"overall", metrics_json(r.overall)}, {"groups", json::object()}};
  for (const auto& [name, m] : r.groups) j["groups"][name] = metrics_json(m);
  return j;
}

void print_report(std::ostream& out, const EvalReport& r) {
  const auto row = [&](const std::string& name, const Metrics& m) {
    out << std::left << std::setw(16) << name << std::right << std::setw(8) << m.counts.tp << std::setw(8)
        << m.counts.fp << std::setw(8) << m.counts.fn << std::fixed << std::setprecision(4) << std::setw(11)
        << m.precision << std::setw(11) << m.recall << std::setw(11) << m.fscore << std::setw(11) << m.ap
        << '\n';
    out.unsetf(std::ios::fixed);
  };
  out << std::left << std::setw(16) << "set" << std::right << std::setw(8) << "TP" << std::setw(8) << "FP"
      << std::setw(8) << "FN" << std::setw(11) << "Precision" << std::setw(11) << "Recall" << std::setw(11)
      << "F-Score" << std::setw(11) << "AP" << '\n';
  row("overall", r.overall);
  for (const auto& [name, m] : r.groups) row(name, m);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  f << j.dump(2) << '\n';
  if (!f) throw Error(ErrorCode::io_error, "cannot write " + path.string());
}

Color source_color(Source s) {
  // Appearance detections are yellow, motion detections blue.
  return is_motion(s) ? Color{0, 80, 255} : Color{255, 220, 0};
}

struct WriterItem {
  std::string line;
  std::optional<Frame> annotated;
};

FrameTiming timing_of(const FrameResult& r) { return {r.total_ms, r.latency_ms}; }

std::vector<Frame> load_all(const std::string& input) {
  auto source = open_frame_source(input);
  std::vector<Frame> frames;
  while (auto f = source->next()) frames.push_back(std::move(*f));
  return frames;
}

}  // namespace

int run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.inputs.size() != 1) throw Error(ErrorCode::invalid_config, "run takes exactly one --input");
    if (opts.out.empty()) throw Error(ErrorCode::invalid_config, "run needs --out");
    opts.pipeline.validate();
    const std::string& input = opts.inputs.front();
    auto source = open_frame_source(input);
    std::optional<Frame> first = source->next();
    if (!first) {
      err << "error: no frames in " << input << '\n';
      return kExitNoInput;
    }
    std::optional<GroundTruth> truth;
    if (!opts.gt.empty()) truth = read_annotations(opts.gt);

    Backends backends = make_backends(opts);
    Pipeline pipeline(opts.pipeline, *backends.detector, *backends.classifier);

    const fs::path out_dir(opts.out);
    fs::create_directories(out_dir);
    if (opts.annotate) fs::create_directories(out_dir / "annotated");
    write_json(out_dir / "run_config.json", run_config_json(opts, input));

    std::ofstream log(out_dir / "detections.jsonl");
    if (!log) throw Error(ErrorCode::io_error, "cannot write detections.jsonl");
    BoundedQueue<WriterItem> queue(64);
    std::string writer_error;
    std::thread writer([&] {
      char name[32];
      while (auto item = queue.pop()) {
        log << item->line << '\n';
        if (!item->annotated || !writer_error.empty()) continue;
        std::snprintf(name, sizeof name, "%06d.png", item->annotated->index);
        try {
          write_png(out_dir / "annotated" / name, item->annotated->rgb);
        } catch (const Error& e) {
          writer_error = e.what();
        }
      }
    });

    Predictions preds;
    std::vector<FrameTiming> timings;
    std::map<std::string, int> by_source;
    int detections = 0, local_frames = 0, fallbacks = 0;
    bool degraded = false;
    std::optional<Frame> prev;
    std::optional<Frame> cur = std::move(first);
    try {
      while (cur) {
        const FrameResult r = pipeline.process_frame(prev ? &*prev : nullptr, *cur);
        timings.push_back(timing_of(r));
        auto& frame_preds = preds[r.frame];
        if (r.detection) {
          ++detections;
          ++by_source[to_string(r.detection->source)];
          frame_preds.push_back(*r.detection);
        }
        local_frames += r.mode_before == DetectorMode::local;
        fallbacks += r.homography_fallback;
        degraded = degraded || r.degraded;
        WriterItem item{format_log_line(r, opts.timing), std::nullopt};
        if (opts.annotate) {
          Frame a = *cur;
          if (r.region) draw_box(a.rgb, *r.region, {255, 255, 255}, 1);
          if (r.detection) draw_box(a.rgb, r.detection->box, source_color(r.detection->source), 2);
          item.annotated = std::move(a);
        }
        queue.push(std::move(item));
        prev = std::move(cur);
        cur = source->next();
      }
    } catch (...) {
      queue.close();
      writer.join();
      throw;
    }
    queue.close();
    writer.join();
    log.flush();
    if (!writer_error.empty()) throw Error(ErrorCode::io_error, writer_error);

    const std::vector<std::vector<FrameTiming>> all{timings};
    const BenchRow row = summarize_run(all);
    json summary{{"frames", row.frames},
                 {"detections", detections},
                 {"by_source", by_source},
                 {"local_frames", local_frames},
                 {"homography_fallbacks", fallbacks},
                 {"degraded", degraded},
                 {"seconds", row.seconds},
                 {"fps", row.fps}};
    if (truth) {
      const std::vector<FrameRecord> records = make_records(preds, *truth);
      const EvalReport report = evaluate(records);
      summary["eval"] = report_json(report);
      print_report(out, report);
    }
    write_json(out_dir / "summary.json", summary);
    out << "processed " << row.frames << " frames, " << detections << " detections, "
        << std::fixed << std::setprecision(1) << row.fps << " fps" << (degraded ? " (degraded)" : "") << '\n';
    out.unsetf(std::ios::fixed);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int bench(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.inputs.empty()) throw Error(ErrorCode::invalid_config, "bench needs at least one --input");
    if (opts.repeat < 1) throw Error(ErrorCode::invalid_config, "--repeat must be >= 1");
    opts.pipeline.validate();
    std::vector<std::vector<Frame>> sequences;
    for (const std::string& input : opts.inputs) {
      sequences.push_back(load_all(input));
      if (sequences.back().empty()) {
        err << "error: no frames in " << input << '\n';
        return kExitNoInput;
      }
    }

    std::vector<BenchRow> rows;
    for (int rep = 0; rep < opts.repeat; ++rep) {
      std::vector<std::vector<FrameTiming>> per_input;
      for (const auto& frames : sequences) {
        Backends backends = make_backends(opts);
        Pipeline pipeline(opts.pipeline, *backends.detector, *backends.classifier);
        auto& timings = per_input.emplace_back();
        for (std::size_t k = 0; k < frames.size(); ++k)
          timings.push_back(timing_of(pipeline.process_frame(k > 0 ? &frames[k - 1] : nullptr, frames[k])));
      }
      rows.push_back(summarize_run(per_input));
    }
    const BenchSummary summary = summarize_bench(rows);

    const auto& names = bench_stage_names();
    out << std::left << std::setw(6) << "run" << std::right << std::setw(8) << "frames" << std::setw(10) << "seconds"
        << std::setw(10) << "fps";
    for (const std::string& n : names) out << std::setw(18) << (n + " ms (n)");
    out << '\n';
    const auto stage_cells = [&](const std::map<std::string, StageStat>& stages) {
      for (const std::string& n : names) {
        const auto it = stages.find(n);
        const StageStat st = it == stages.end() ? StageStat{} : it->second;
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(3) << st.mean_ms << " (" << st.samples << ")";
        out << std::setw(18) << cell.str();
      }
      out << '\n';
    };
    out << std::fixed;
    for (std::size_t i = 0; i < summary.rows.size(); ++i) {
      const BenchRow& r = summary.rows[i];
      out << std::left << std::setw(6) << (i + 1) << std::right << std::setw(8) << r.frames << std::setprecision(3)
          << std::setw(10) << r.seconds << std::setprecision(1) << std::setw(10) << r.fps;
      stage_cells(r.stages);
    }
    out << std::left << std::setw(6) << "all" << std::right << std::setw(8) << "" << std::setw(10) << ""
        << std::setprecision(1) << std::setw(10) << summary.fps_mean;
    stage_cells(summary.stages);
    out << "fps mean " << std::setprecision(2) << summary.fps_mean << "  stddev " << summary.fps_stddev << '\n';
    out.unsetf(std::ios::fixed);

    if (!opts.out.empty()) {
      fs::create_directories(opts.out);
      json j{{"fps_mean", summary.fps_mean}, {"fps_stddev", summary.fps_stddev}, {"rows", json::array()}};
      const auto stages_json = [](const std::map<std::string, StageStat>& stages) {
        json s = json::object();
        for (const auto& [n, st] : stages) s[n] = {{"samples", st.samples}, {"mean_ms", st.mean_ms}};
        return s;
      };
      for (const BenchRow& r : summary.rows)
        j["rows"].push_back(
            {{"frames", r.frames}, {"seconds", r.seconds}, {"fps", r.fps}, {"stages", stages_json(r.stages)}});
      j["stages"] = stages_json(summary.stages);
      write_json(fs::path(opts.out) / "bench.json", j);
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.logs.empty() || opts.logs.size() != opts.gts.size())
      throw Error(ErrorCode::invalid_config, "eval needs matching --log and --gt lists");
    if (!opts.videos.empty() && opts.videos.size() != opts.logs.size())
      throw Error(ErrorCode::invalid_config, "--video must be given once per --log");
    std::map<std::string, std::string> conditions;
    if (!opts.conditions.empty()) conditions = read_conditions(opts.conditions);

    std::vector<FrameRecord> records;
    for (std::size_t i = 0; i < opts.logs.size(); ++i) {
      const std::string video =
          opts.videos.empty() ? fs::absolute(opts.logs[i]).parent_path().filename().string() : opts.videos[i];
      std::string group;
      if (!conditions.empty()) {
        const auto it = conditions.find(video);
        if (it != conditions.end()) group = it->second;
      } else if (opts.logs.size() > 1) {
        group = video;
      }
      std::vector<FrameRecord> r =
          make_records(read_detection_log(opts.logs[i]), read_annotations(opts.gts[i]), group);
      records.insert(records.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    const EvalReport report = evaluate(records, opts.iou);
    const json j = report_json(report);
    if (opts.json) {
      out << j.dump(2) << '\n';
    } else {
      print_report(out, report);
    }
    if (!opts.out.empty()) write_json(opts.out, j);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int synth(const SynthOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.out.empty()) throw Error(ErrorCode::invalid_config, "synth needs --out");
    SceneConfig cfg = scene_preset(opts.preset);
    if (opts.frames) cfg.frames = *opts.frames;
    if (opts.width) cfg.width = *opts.width;
    if (opts.height) cfg.height = *opts.height;
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.brightness_step) cfg.brightness_max_step = *opts.brightness_step;
    if (opts.no_target) cfg.target.reset();
    if (cfg.target) {
      if (opts.target_size) cfg.target->size = *opts.target_size;
      if (opts.speed_x) cfg.target->velocity.x() = *opts.speed_x;
      if (opts.speed_y) cfg.target->velocity.y() = *opts.speed_y;
      if (opts.contrast) cfg.target->contrast = *opts.contrast;
    }
    const Scene scene = generate(cfg);
    write_scene(opts.out, scene, cfg);
    out << "wrote " << scene.frames.size() << " frames (" << cfg.width << "x" << cfg.height << ") to " << opts.out
        << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace mavdet::app
