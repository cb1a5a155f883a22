#pragma once

#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "gsr/athlete.hpp"
#include "gsr/calibration.hpp"
#include "gsr/camera.hpp"
#include "gsr/io.hpp"
#include "gsr/pitch.hpp"
#include "gsr/projection.hpp"

namespace gsr {

using Rng = std::mt19937_64;

struct NoiseModel {
  /// Gaussian pixel noise on keypoints and line points.
  double keypointSigma = 0.0;
  double detectionDropout = 0.0;
  /// Expected number of false detections per frame (Poisson).
  double falsePositiveRate = 0.0;
  double embeddingNoiseSigma = 0.0;
  /// Gaussian pixel noise on each box coordinate.
  double bboxJitter = 0.0;
};

/// Throws Error on negative sigmas or probabilities outside [0, 1].
void validate(const NoiseModel& noise);

struct SyntheticIdentity {
  int trackId = 0;
  Role role = Role::player;
  std::optional<Team> team;
  std::optional<int> jersey;
  /// Unit-norm appearance centroid.
  Eigen::VectorXd centroid;
};

struct SyntheticScene {
  ImageSize size;
  double dt = 0.04;
  PitchDimensions dims;
  std::vector<CameraParams> cameraTrajectory;  // per frame
  std::vector<SyntheticIdentity> identities;
  /// positions[frame][identity]
  std::vector<std::vector<PitchPosition>> positions;

  int frames() const { return static_cast<int>(cameraTrajectory.size()); }
};

/// Axis-aligned pitch rectangle (meters).
struct PitchRegion {
  double xmin = -52.5;
  double xmax = 52.5;
  double ymin = -34.0;
  double ymax = 34.0;
};

struct SimulationConfig {
  int nPlayers = 22;
  int nReferees = 0;
  int nFrames = 1;
  double dt = 0.04;
  PitchDimensions dims;
  ImageSize size;
  int embeddingDims = 128;
  double maxCentroidCosine = 0.3;
  /// Athlete speed bound (m/s) and Ornstein-Uhlenbeck velocity parameters.
  double vmax = 8.0;
  double ouTheta = 0.5;
  double ouSigma = 2.0;
  /// Distance athletes may leave the pitch by.
  double margin = 5.0;
  /// Restricts athletes to a sub-rectangle (still clipped to pitch + margin).
  std::optional<PitchRegion> region;
  /// Fixed base camera instead of sample_main_camera.
  std::optional<CameraParams> camera;
  bool moveCamera = true;
  /// Bounds on the camera's pan/tilt rate (rad/s) and relative zoom rate (1/s).
  double maxAngularRate = 0.15;
  double maxZoomRate = 0.05;
};

/// Broadcast main-camera viewpoint near the halfway line on the near side.
/// Rejection-samples until at least `minKeypoints` ground keypoints that do
/// not all lie on one line project inside the frame.
CameraParams sample_main_camera(Rng& rng, ImageSize size = {}, const PitchModel& pitch = build_pitch(),
                                int minKeypoints = 8);

SyntheticScene simulate_match(Rng& rng, const SimulationConfig& cfg = {});

struct RenderConfig {
  /// Arc-length spacing for rendered line polylines (meters).
  double lineSpacing = 1.0;
  bool renderLines = true;
};

struct FrameObservation {
  std::vector<KeypointObservation> keypoints;
  std::vector<LineObservation> lines;
  std::vector<AthleteDetection> detections;
  /// Identity index per detection; -1 for false positives.
  std::vector<int> detectionIdentity;
  /// Noise-free annotation with camera and valid flag.
  FrameAnnotation groundTruth;
};

/// Box of an athlete standing at `pos`: bottom-center on the foot point, 1.8 m
/// body height under the camera, width 0.4 x height. Absent if the athlete is
/// behind the camera.
std::optional<BBox> athlete_box(const CameraParams& cam, const PitchPosition& pos);

inline constexpr double kBodyHeight = 1.8;

std::vector<FrameObservation> render_observations(const SyntheticScene& scene, const NoiseModel& noise,
                                                  Rng& rng, const RenderConfig& cfg = {});

/// Observations of one frame as an annotation without camera (detector
/// output format).
FrameAnnotation observation_annotation(const FrameObservation& obs, ImageSize size);

}  // namespace gsr
