// Batch command-line front end.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "gsr/cli.hpp"
#include "gsr/errors.hpp"

int main(int argc, char** argv) {
  using namespace gsr;
  RunConfig cfg;
  std::string input, output, gt, calib, summary, scores;

  CLI::App app{"gsrkit: calibration, tracking and evaluation for broadcast soccer clips"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.add_option("--pitch-length", cfg.dims.length, "Pitch length (m)")->capture_default_str();
  app.add_option("--pitch-width", cfg.dims.width, "Pitch width (m)")->capture_default_str();
  app.add_option("--gamma", cfg.gammas, "JaC thresholds in pixels")->capture_default_str()->delimiter(',');
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "Clips processed in parallel")->capture_default_str();
  app.add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"json", "table"}))->capture_default_str();
  app.add_option("--summary", summary, "Summary JSON path (default <out>/summary.json)");

  auto io = [&](CLI::App* sub, bool needsOut) {
    sub->add_option("--in", input, "Input directory")->required();
    auto* o = sub->add_option("--out", output, "Output directory");
    if (needsOut) o->required();
  };

  auto* synth = app.add_subcommand("synth", "Generate synthetic clips with ground truth");
  synth->add_option("--out", output, "Output directory")->required();
  synth->add_option("--clips", cfg.clips)->capture_default_str();
  synth->add_option("--frames", cfg.frames)->capture_default_str();
  synth->add_option("--players", cfg.players)->capture_default_str();
  synth->add_option("--referees", cfg.referees)->capture_default_str();
  synth->add_option("--fps", cfg.fps)->capture_default_str();
  synth->add_option("--width", cfg.size.width)->capture_default_str();
  synth->add_option("--height", cfg.size.height)->capture_default_str();
  synth->add_option("--keypoint-sigma", cfg.noise.keypointSigma)->capture_default_str();
  synth->add_option("--dropout", cfg.noise.detectionDropout)->capture_default_str();
  synth->add_option("--false-positive-rate", cfg.noise.falsePositiveRate)->capture_default_str();
  synth->add_option("--embedding-sigma", cfg.noise.embeddingNoiseSigma)->capture_default_str();
  synth->add_option("--bbox-jitter", cfg.noise.bboxJitter)->capture_default_str();
  bool staticCamera = false;
  synth->add_flag("--static-camera", staticCamera);

  auto* calibrate = app.add_subcommand("calibrate", "Estimate per-frame cameras from keypoints and lines");
  io(calibrate, true);
  calibrate->add_option("--gt", gt, "Optional ground truth to score against");
  calibrate->add_option("--min-confidence", cfg.calibration.minConfidence)->capture_default_str();

  auto* annotate = app.add_subcommand("annotate", "Replace keypoints and lines by pitch projections");
  io(annotate, true);
  annotate->add_option("--spacing", cfg.annotateSpacing, "Line sampling (m)")->capture_default_str();

  auto* track = app.add_subcommand("track", "Associate detections into tracklets");
  io(track, true);
  track->add_option("--lambda", cfg.tracker.lambdaAppearance)->capture_default_str();
  track->add_option("--max-age", cfg.tracker.maxAge)->capture_default_str();
  track->add_option("--n-init", cfg.tracker.nInit)->capture_default_str();
  track->add_option("--max-cosine-distance", cfg.tracker.maxCosineDistance)->capture_default_str();
  track->add_option("--iou-gate", cfg.tracker.iouGate)->capture_default_str();
  track->add_option("--ema-alpha", cfg.tracker.emaAlpha)->capture_default_str();

  auto* post = app.add_subcommand("postprocess", "Vote attributes, merge tracklets, split teams");
  io(post, true);
  post->add_option("--calib", calib, "Calibrated clips (default: cameras in the input)");
  post->add_option("--merge-cosine", cfg.merge.cosineMin)->capture_default_str();
  post->add_option("--merge-gap", cfg.merge.maxGap)->capture_default_str();
  post->add_option("--team-restarts", cfg.team.restarts)->capture_default_str();
  post->add_option("--position-weight", cfg.team.positionWeight)->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--in", input, "Prediction directory");
  eval->add_option("--gt", gt, "Ground-truth directory");
  eval->add_option("--mode", cfg.evalMode)->check(CLI::IsMember({"calibration", "tracking"}))->capture_default_str();
  eval->add_option("--scores", scores, "Aggregated percentages {cr, jac} to turn into a report");
  eval->add_option("--out", output, "Directory for summary.json");

  CLI11_PARSE(app, argc, argv);

  cfg.input = input;
  cfg.output = output;
  if (!gt.empty()) cfg.groundTruth = gt;
  if (!calib.empty()) cfg.calibrations = calib;
  if (!summary.empty()) cfg.summary = summary;
  if (!scores.empty()) cfg.scores = scores;
  cfg.moveCamera = !staticCamera;

  try {
    CommandResult r;
    if (*synth) r = cmd_synth(cfg);
    else if (*calibrate) r = cmd_calibrate(cfg);
    else if (*annotate) r = cmd_annotate(cfg);
    else if (*track) r = cmd_track(cfg);
    else if (*post) r = cmd_postprocess(cfg);
    else r = cmd_eval(cfg);
    std::cout << r.report;
    return r.status;
  } catch (const SchemaViolation& e) {
    std::cerr << "error: " << e.what() << " at '" << e.path() << "'\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
