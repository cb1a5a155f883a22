#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "gsr/athlete.hpp"
#include "gsr/camera.hpp"

namespace gsr {

inline constexpr double kLegibilityThreshold = 0.5;

/// Nulls jersey numbers whose legibility score is below `threshold`.
std::vector<AthleteDetection> filter_legibility(std::vector<AthleteDetection> dets,
                                                double threshold = kLegibilityThreshold);

struct VotedAttributes {
  Role role = Role::unknown;
  std::optional<int> jersey;
};

/// Majority vote over a non-empty tracklet. Ties go to the label with the
/// larger summed detection confidence, then to the smaller jersey number or
/// earlier role. Unknown roles only win when nothing else was observed.
VotedAttributes vote_attributes(const Tracklet& tracklet);

/// Normalized mean of the entry embeddings; empty when none carries one.
Eigen::VectorXd mean_embedding(const Tracklet& tracklet);

/// Recomputes votes and mean embedding in place.
void refresh_attributes(Tracklet& tracklet);

struct MergeConfig {
  double cosineMin = 0.7;
  /// Largest frame difference between the end of one fragment and the start
  /// of the next.
  int maxGap = 150;
  bool requireJerseyConsistency = true;
};

/// Whether two tracklets may be joined: disjoint in time, within maxGap,
/// similar enough, and with compatible jerseys.
bool mergeable(const Tracklet& a, const Tracklet& b, const MergeConfig& cfg);

/// Greedy agglomeration: repeatedly joins the most similar mergeable pair.
/// The merged tracklet keeps the smaller id. Output ordered by track id.
std::vector<Tracklet> merge_tracklets(std::vector<Tracklet> tracklets, const MergeConfig& cfg = {});

struct TeamConfig {
  int restarts = 50;
  int maxIterations = 100;
  std::uint64_t seed = 0;
  /// Weight of the standardized mean pitch position next to the embedding.
  /// At 1.0 the team-blind y axis can outweigh kits only 0.7 apart in cosine
  /// distance.
  double positionWeight = 0.5;
};

/// Two-way split of player tracklets by k-means on embedding plus
/// standardized mean pitch position. The cluster with the smaller mean x is
/// "left". Goalkeepers join the side matching their median x; referees and
/// unknown roles get no team. `calibrations` maps frame index to camera.
/// Throws InsufficientData with fewer than two player tracklets or without
/// any usable calibration.
std::vector<Tracklet> assign_teams(std::vector<Tracklet> tracklets,
                                   const std::map<int, CameraParams>& calibrations,
                                   const TeamConfig& cfg = {});

}  // namespace gsr
