#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace gsr {

enum class Role { player, goalkeeper, referee, unknown };
enum class Team { left, right };

std::string_view to_string(Role role);
std::string_view to_string(Team team);
/// Unrecognized labels map to Role::unknown.
Role parse_role(std::string_view s);
std::optional<Team> parse_team(std::string_view s);

/// Axis-aligned box as (left, top, width, height) in pixels.
struct BBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double area() const { return width * height; }
  double center_x() const { return left + width / 2; }
  double center_y() const { return top + height / 2; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

double iou(const BBox& a, const BBox& b);

struct AthleteDetection {
  BBox bbox;
  Role role = Role::unknown;
  std::optional<int> jerseyNumber;
  double legibilityScore = 0.0;
  /// Unit-norm ReID embedding; absent when the detector supplied none.
  std::optional<Eigen::VectorXd> embedding;
  double confidence = 1.0;
};

struct TrackletEntry {
  int frame = 0;
  /// Index of the detection within its frame's detection list.
  int detectionIndex = 0;
  AthleteDetection detection;
};

/// Identity-linked detections of one athlete, frames strictly increasing.
struct Tracklet {
  int trackId = 0;
  std::vector<TrackletEntry> entries;
  Role votedRole = Role::unknown;
  std::optional<int> votedJersey;
  /// Normalized mean of the entry embeddings; empty if no entry carries one.
  Eigen::VectorXd meanEmbedding;
  std::optional<Team> team;

  int first_frame() const { return entries.front().frame; }
  int last_frame() const { return entries.back().frame; }
};

}  // namespace gsr
