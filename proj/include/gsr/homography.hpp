#pragma once

#include <span>

#include "gsr/camera.hpp"

namespace gsr {

/// Ground-plane point (meters) and its observed image position (pixels).
struct PointCorrespondence {
  Vec2 world;
  Vec2 image;
};

/// Normalized DLT. The result maps (X, Y, 1) to image points up to scale,
/// has unit Frobenius norm, and gives positive homogeneous w on the input
/// set. Throws DegenerateConfiguration for fewer than four pairs or a rank
/// deficient design matrix (e.g. collinear world points).
Mat3 estimate_homography_dlt(std::span<const PointCorrespondence> pairs);

/// Ground-plane homography K [r1 r2 t] of a camera.
Mat3 compose_homography(const CameraParams& cam);

/// Recovers a zero-skew, square-pixel camera with the principal point at the
/// image center from a ground-plane homography. Throws NoValidFocal when the
/// orthonormality constraints give f^2 <= 0 or leave f undetermined (e.g.
/// fronto-parallel views), BehindGround when the camera center lies on the
/// ground plane.
CameraParams decompose_homography(const Mat3& H, int imageWidth, int imageHeight);

/// Pose for a known focal: R and t from K^-1 H with the same normalization
/// and sign rules as decompose_homography.
CameraParams pose_from_homography(const Mat3& H, double focal, int imageWidth, int imageHeight);

}  // namespace gsr
