#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsr/camera.hpp"
#include "gsr/homography.hpp"
#include "gsr/pitch.hpp"

namespace gsr {

/// Detected pitch keypoint in pixels with detector confidence p in [0, 1].
struct KeypointObservation {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double p = 1.0;
};

/// Detected pitch line as an ordered point sequence in normalized image
/// coordinates. The sequence extremes are the segment endpoints.
struct LineObservation {
  std::string name;
  std::vector<Vec2> points;
};

/// Largest reprojection error per observed element, in pixels.
struct ElementResiduals {
  std::map<int, double> keypoints;
  std::map<std::string, double> lines;
};

struct CalibrationResult {
  CameraParams params;
  double rmsReprojError = 0.0;
  /// RMS of the initialization on the same residuals.
  double initialRmsReprojError = 0.0;
  ElementResiduals perElementResiduals;
  bool valid = false;
  int iterations = 0;
  bool converged = false;
  /// Cost after initialization and after every accepted step.
  std::vector<double> costHistory;
};

struct RefineConfig {
  double initialDamping = 1e-3;
  double dampingFactor = 10.0;
  int maxIters = 100;
  double relativeTolerance = 1e-8;
  /// Arc-length spacing of the projected polylines lines are measured against.
  double lineSpacing = 0.25;
};

struct ValidityConfig {
  /// RMS threshold in pixels at referenceWidth; scaled with the image width.
  double maxRms = 5.0;
  double referenceWidth = 960.0;
  double minFocalRatio = 0.2;
  double maxFocalRatio = 10.0;
  double minHeight = 2.0;
  double maxHeight = 80.0;
};

struct CalibrationConfig {
  double minConfidence = 0.5;
  /// Below this many ground keypoints, intersections of observed lines are
  /// added to the DLT correspondences.
  int minKeypointsBeforeLines = 6;
  RefineConfig refine;
  ValidityConfig validity;
};

/// Point-to-point and point-to-polyline residuals of a camera against the
/// observations that name a known keypoint or element. Unknown ids/names are
/// skipped.
ElementResiduals reprojection_residuals(const CameraParams& cam,
                                        std::span<const KeypointObservation> kps,
                                        std::span<const LineObservation> lines,
                                        const PitchModel& pitch, ImageSize size,
                                        double lineSpacing = 0.25);

bool passes_validity(const CameraParams& cam, double rms, ImageSize size,
                     const ValidityConfig& cfg);

/// Levenberg-Marquardt over (f, local rotation, t) with the principal point
/// fixed at the image center. Never returns a higher cost than `init`.
CalibrationResult refine_pnl(const CameraParams& init, std::span<const KeypointObservation> kps,
                             std::span<const LineObservation> lines, const PitchModel& pitch,
                             ImageSize size, const CalibrationConfig& cfg = {});

/// Full per-frame pipeline: confidence filter, DLT, decomposition, PnL
/// refinement and validity gate. Absent when the frame cannot be calibrated.
std::optional<CalibrationResult> calibrate_frame(std::span<const KeypointObservation> kps,
                                                 std::span<const LineObservation> lines,
                                                 const PitchModel& pitch, ImageSize size,
                                                 const CalibrationConfig& cfg = {});

}  // namespace gsr
