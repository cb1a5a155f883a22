#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gsr/athlete.hpp"
#include "gsr/camera.hpp"
#include "gsr/pitch.hpp"

namespace gsr {

struct PitchPosition {
  double x = 0.0;
  double y = 0.0;
};

/// Pitch elements as seen by a camera. Keypoints in pixels, line points in
/// normalized image coordinates.
struct ProjectedAnnotations {
  std::map<int, Vec2> keypoints;
  std::map<std::string, std::vector<Vec2>> lines;
};

inline constexpr double kDefaultSampleSpacing = 0.25;

/// Pinhole projection; absent when the point is not in front of the camera.
std::optional<Vec2> project_point(const CameraParams& cam, const Vec3& X);

/// Pixel inside [0, W) x [0, H).
bool in_frame(const Vec2& p, ImageSize size);

/// Projects every catalogue keypoint and element. Elements are sampled at
/// `spacing` meters and clipped to the frame; where a polyline leaves the
/// frame the exact boundary crossing of the projected curve is inserted.
ProjectedAnnotations project_pitch(const CameraParams& cam, const PitchModel& pitch,
                                   ImageSize size, double spacing = kDefaultSampleSpacing);

/// Visible part of a single element, in pixels. Disjoint visible pieces are
/// returned separately.
std::vector<std::vector<Vec2>> project_element(const CameraParams& cam, const PitchElement& elem,
                                               ImageSize size, double spacing);

/// Intersection of the viewing ray through `p` with the ground plane.
std::optional<PitchPosition> image_to_pitch(const CameraParams& cam, const Vec2& p);

/// Ground position of an athlete from the bottom-center of its box.
std::optional<PitchPosition> athlete_pitch_position(const CameraParams& cam, const BBox& box);

}  // namespace gsr
