#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"

namespace {

void add_pipeline_flags(CLI::App& cmd, mavdet::app::RunOptions& o) {
  mavdet::PipelineConfig& p = o.pipeline;
  cmd.add_option("--input", o.inputs, "Image-sequence directory, raw stream file, or - for stdin")->required();
  cmd.add_option("--detector-cmd", o.detector, "none | oracle:<gt.csv> | command")->capture_default_str();
  cmd.add_option("--classifier-cmd", o.classifier, "passthrough | oracle:<gt.csv> | command")
      ->capture_default_str();
  cmd.add_option("--t0", p.detector.t0, "Global detector confidence threshold")->capture_default_str();
  cmd.add_option("--t1", p.detector.t1, "Local detector confidence threshold")->capture_default_str();
  cmd.add_option("--t2", p.segmentation.t2, "Base binarization threshold")->capture_default_str();
  cmd.add_option("--t3", p.motion_classifier.t3, "Angle variance limit")->capture_default_str();
  cmd.add_option("--t4", p.motion_classifier.t4, "Velocity variance limit")->capture_default_str();
  cmd.add_option("--t5", p.motion_classifier.t5, "Minimum mean speed, px/frame")->capture_default_str();
  cmd.add_option("--d1", p.segmentation.d1, "Box merge distance, px")->capture_default_str();
  cmd.add_option("--alpha", p.segmentation.alpha, "Light-intensity coefficient")->capture_default_str();
  cmd.add_option("--beta", p.segmentation.beta, "Background-motion coefficient")->capture_default_str();
  cmd.add_option("--min-area", p.segmentation.min_area, "Smallest candidate component, px")->capture_default_str();
  cmd.add_option("--lost-limit", p.lost_limit, "Local failures tolerated before returning to global")
      ->capture_default_str();
  cmd.add_option("--region-base", p.region_base, "Search region side with no misses, px")->capture_default_str();
  cmd.add_option("--region-growth", p.region_growth, "Search region growth per miss, px")->capture_default_str();
  cmd.add_option("--seed", o.seed, "Seed for mock backends")->capture_default_str();
  cmd.add_option("--oracle-dropout", o.oracle_dropout, "Oracle detector miss probability")->capture_default_str();
  cmd.add_option("--oracle-jitter", o.oracle_jitter, "Oracle detector center jitter sigma, px")
      ->capture_default_str();
  cmd.add_option("--timeout-ms", o.request_timeout_ms, "External backend request timeout")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Global-local detection of small aerial targets in video"};
  cli.require_subcommand(1);

  mavdet::app::RunOptions run;
  auto* run_cmd = cli.add_subcommand("run", "Run the detector over a sequence and write a detection log");
  add_pipeline_flags(*run_cmd, run);
  run_cmd->add_option("--gt", run.gt, "Ground truth for an evaluation summary");
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_flag("--annotate", run.annotate, "Write annotated PNG frames");
  run_cmd->add_flag("!--no-timing", run.timing, "Leave per-frame timings out of the log");
  run_cmd->get_option("--input")->expected(1);

  mavdet::app::RunOptions bench;
  auto* bench_cmd = cli.add_subcommand("bench", "Per-module latency and average FPS");
  add_pipeline_flags(*bench_cmd, bench);
  bench_cmd->add_option("--repeat", bench.repeat, "Timing runs")->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "Directory for bench.json");

  mavdet::app::EvalOptions ev;
  auto* eval_cmd = cli.add_subcommand("eval", "Score detection logs against ground truth");
  eval_cmd->add_option("--log", ev.logs, "detections.jsonl (repeatable)")->required();
  eval_cmd->add_option("--gt", ev.gts, "gt.csv or JSON lines, one per --log")->required();
  eval_cmd->add_option("--video", ev.videos, "Video name per --log, for --conditions");
  eval_cmd->add_option("--conditions", ev.conditions, "conditions.csv with video,condition");
  eval_cmd->add_option("--iou", ev.iou, "IOU threshold (strict)")->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "Write the report as JSON");
  eval_cmd->add_flag("--json", ev.json, "Print JSON instead of the table");

  mavdet::app::SynthOptions sy;
  auto* synth_cmd = cli.add_subcommand("synth", "Render a synthetic sequence with ground truth");
  synth_cmd->add_option("--preset", sy.preset, "Scene preset")->capture_default_str();
  synth_cmd->add_option("--out", sy.out, "Output directory")->required();
  synth_cmd->add_option("--frames", sy.frames);
  synth_cmd->add_option("--width", sy.width);
  synth_cmd->add_option("--height", sy.height);
  synth_cmd->add_option("--seed", sy.seed);
  synth_cmd->add_option("--target-size", sy.target_size);
  synth_cmd->add_option("--speed-x", sy.speed_x, "Target speed relative to the background, px/frame");
  synth_cmd->add_option("--speed-y", sy.speed_y);
  synth_cmd->add_option("--contrast", sy.contrast, "Target intensity relative to the background mean");
  synth_cmd->add_option("--brightness-step", sy.brightness_step);
  synth_cmd->add_flag("--no-target", sy.no_target);

  CLI11_PARSE(cli, argc, argv);

  if (run_cmd->parsed()) return mavdet::app::run(run, std::cout, std::cerr);
  if (bench_cmd->parsed()) return mavdet::app::bench(bench, std::cout, std::cerr);
  if (eval_cmd->parsed()) return mavdet::app::eval(ev, std::cout, std::cerr);
  return mavdet::app::synth(sy, std::cout, std::cerr);
}
