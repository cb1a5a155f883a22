#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "gsr/athlete.hpp"
#include "gsr/kalman.hpp"

namespace gsr {

enum class TrackState { tentative, confirmed, lost, removed };

struct TrackerConfig {
  /// Weight of appearance against motion in the first association stage.
  double lambdaAppearance = 0.75;
  /// Chi-square 95% quantile for 4 degrees of freedom.
  double gatingMahalanobis = 9.4877;
  /// Largest admissible cosine distance (1 - cosine) in the first stage.
  double maxCosineDistance = 0.4;
  /// Minimum IoU in the fallback stage.
  double iouGate = 0.1;
  int maxAge = 30;
  int nInit = 3;
  /// Weight of the previous appearance in the exponential moving average.
  double emaAlpha = 0.9;
};

/// Throws Error if a weight lies outside [0, 1] or a count is not positive.
void validate(const TrackerConfig& cfg);

struct Track {
  int trackId = 0;
  TrackState state = TrackState::tentative;
  BoxKalmanFilter::State motion;
  /// Unit-norm appearance; empty until a detection with an embedding is seen.
  Eigen::VectorXd appearance;
  /// frame -> detection index
  std::map<int, int> history;
  int hits = 0;
  int timeSinceUpdate = 0;
};

/// Advances the track's motion state one frame and returns the predicted box.
BBox kalman_predict(Track& track, const BoxKalmanFilter& kf = {});

struct AssociationResult {
  std::vector<std::pair<int, int>> matches;  // (track index, detection index)
  std::vector<int> unmatchedTracks;
  std::vector<int> unmatchedDetections;
};

/// Two-stage association. Stage one matches confirmed and lost tracks to
/// detections with embeddings on a blend of cosine distance and normalized
/// Mahalanobis distance; stage two matches the remaining tentative tracks,
/// tracks updated on the previous frame, and every leftover detection on IoU.
/// Tracks are expected to have been predicted for the current frame.
AssociationResult associate(std::span<const Track> tracks,
                            std::span<const AthleteDetection> detections,
                            const TrackerConfig& cfg, const BoxKalmanFilter& kf = {});

/// Online tracker state for one sequence.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {});

  /// Processes one frame. Returns (detection index, track id) for every
  /// detection, ordered by detection index.
  std::vector<std::pair<int, int>> step(std::span<const AthleteDetection> detections);

  /// Live (non-removed) tracks.
  const std::vector<Track>& tracks() const { return tracks_; }
  int frame() const { return frame_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackerConfig cfg_;
  BoxKalmanFilter kf_;
  std::vector<Track> tracks_;
  int frame_ = -1;
  int next_id_ = 1;
};

/// Runs the tracker over a sequence; tracklets ordered by track id.
std::vector<Tracklet> run_sequence(const std::vector<std::vector<AthleteDetection>>& frames,
                                   const TrackerConfig& cfg = {});

}  // namespace gsr
