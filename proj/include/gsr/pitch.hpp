#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gsr/camera.hpp"

namespace gsr {

/// Regulation dimensions in meters. Defaults describe a 105 x 68 pitch.
struct PitchDimensions {
  double length = 105.0;
  double width = 68.0;
  double centerCircleRadius = 9.15;
  double penaltyAreaDepth = 16.5;
  double penaltyAreaWidth = 40.32;
  double goalAreaDepth = 5.5;
  double goalAreaWidth = 18.32;
  double penaltyMarkDistance = 11.0;
  double goalWidth = 7.32;
  double goalHeight = 2.44;
};

/// Throws InvalidDimensions describing the first violated constraint.
void validate(const PitchDimensions& dims);

struct Segment3 {
  Vec3 a;
  Vec3 b;
};

/// Circular arc in the ground plane, swept counter-clockwise from
/// startAngle to endAngle (endAngle > startAngle). A sweep of 2*pi is a
/// full circle.
struct Arc3 {
  Vec3 center;
  double radius = 0.0;
  double startAngle = 0.0;
  double endAngle = 0.0;

  bool full_circle() const;
};

struct PitchElement {
  std::string name;
  std::variant<Segment3, Arc3> geometry;

  bool is_arc() const { return std::holds_alternative<Arc3>(geometry); }
  /// Point at normalized arc-length parameter s in [0, 1].
  Vec3 point_at(double s) const;
  double length() const;
  bool on_ground() const;
};

/// Painted spot that is not the intersection of two markings.
struct PitchMark {
  std::string name;
  Vec3 position;
};

struct PitchKeypoint {
  int id = 0;
  std::string description;
  Vec3 position;
};

/// Canonical pitch. Origin at the center spot, x toward the right goal line,
/// y toward the far touchline, z up. Immutable once built.
class PitchModel {
 public:
  PitchModel(PitchDimensions dims, std::vector<PitchElement> elements,
             std::vector<PitchMark> marks, std::vector<PitchKeypoint> keypoints);

  const PitchDimensions& dims() const { return dims_; }
  const std::vector<PitchElement>& elements() const { return elements_; }
  const std::vector<PitchMark>& marks() const { return marks_; }
  const std::vector<PitchKeypoint>& keypoints() const { return keypoints_; }

  const PitchElement* find_element(std::string_view name) const;
  const PitchKeypoint* find_keypoint(int id) const;

 private:
  PitchDimensions dims_;
  std::vector<PitchElement> elements_;
  std::vector<PitchMark> marks_;
  std::vector<PitchKeypoint> keypoints_;
  std::map<std::string, std::size_t, std::less<>> element_index_;
  std::map<int, std::size_t> keypoint_index_;
};

PitchModel build_pitch(const PitchDimensions& dims = {});

/// Keypoint catalogue in id order (ids 1..N, stable for a given enumeration
/// version).
const std::vector<PitchKeypoint>& keypoint_catalogue(const PitchModel& model);

/// Samples an element so consecutive arc-length gaps are at most `spacing`.
/// Segments always include both endpoints; a full circle returns n distinct
/// points without repeating the start.
std::vector<Vec3> sample_element(const PitchElement& elem, double spacing);

/// Version tag of the keypoint/line enumeration written into exported tables.
inline constexpr std::string_view kPitchEnumerationVersion = "gsrkit-pitch-1";

}  // namespace gsr
