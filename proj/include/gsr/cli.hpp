#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gsr/calibration.hpp"
#include "gsr/io.hpp"
#include "gsr/pitch.hpp"
#include "gsr/synth.hpp"
#include "gsr/tracker.hpp"
#include "gsr/tracklet.hpp"

namespace gsr {

namespace fs = std::filesystem;

struct RunConfig {
  fs::path input;
  fs::path output;
  /// Ground-truth directory for eval (and the optional scoring in calibrate).
  std::optional<fs::path> groundTruth;
  /// Calibrated clips used by postprocess; defaults to the cameras stored in
  /// the input clips.
  std::optional<fs::path> calibrations;
  /// Summary JSON; defaults to <output>/summary.json.
  std::optional<fs::path> summary;

  PitchDimensions dims;
  CalibrationConfig calibration;
  TrackerConfig tracker;
  MergeConfig merge;
  TeamConfig team;
  std::vector<double> gammas{5.0, 10.0, 20.0};
  double annotateSpacing = 0.25;
  double metricSpacing = 0.25;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string format = "json";

  // eval
  std::string evalMode = "calibration";
  /// Already aggregated percentages {"cr": .., "jac": {"5": ..}} to score.
  std::optional<fs::path> scores;

  // synth
  int clips = 1;
  int frames = 10;
  int players = 22;
  int referees = 0;
  double fps = 25.0;
  bool moveCamera = true;
  NoiseModel noise;
  ImageSize size;
};

/// Throws Error when paths required by `command` are missing or values are
/// out of range.
void validate(const RunConfig& cfg, const std::string& command);

struct CommandResult {
  /// 0 ok, 2 schema violation in some input, 1 other failure.
  int status = 0;
  Json summary = Json::object();
  /// Human-readable report in the configured format.
  std::string report;
};

CommandResult cmd_synth(const RunConfig& cfg);
CommandResult cmd_calibrate(const RunConfig& cfg);
CommandResult cmd_annotate(const RunConfig& cfg);
CommandResult cmd_track(const RunConfig& cfg);
CommandResult cmd_postprocess(const RunConfig& cfg);
CommandResult cmd_eval(const RunConfig& cfg);

/// Clip files of a directory in name order (summaries and sidecars skipped).
std::vector<fs::path> list_clips(const fs::path& dir);

/// Sidecar next to a clip (<stem>.emb or <stem>.emb.json), if any.
std::optional<fs::path> sidecar_for(const fs::path& clip);

}  // namespace gsr
