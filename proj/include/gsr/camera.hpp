#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gsr {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

struct ImageSize {
  int width = 1920;
  int height = 1080;
};

/// Pinhole camera, world -> camera: X_c = R X + t. No lens distortion.
struct CameraParams {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Mat3 K() const;
  Mat34 Rt() const;
  /// Camera center in world coordinates, -R^T t.
  Vec3 center() const { return -R.transpose() * t; }

  static CameraParams from_K_Rt(const Mat3& K, const Mat34& Rt);
};

/// fx, fy > 0, R orthonormal with det +1, and camera center above z = 0.
bool is_valid(const CameraParams& cam, double tol = 1e-8);

/// World->camera rotation for a camera whose optical axis points along
/// (sin(pan) cos(tilt), cos(pan) cos(tilt), sin(tilt)). pan = tilt = 0 looks
/// along +y (toward the far touchline), negative tilt looks down, roll
/// rotates the image clockwise about the optical axis.
Mat3 rotation_from_pan_tilt_roll(double pan, double tilt, double roll);

/// Camera with centered principal point and square pixels looking from
/// `center` with the given orientation.
CameraParams make_camera(const Vec3& center, double pan, double tilt, double roll,
                         double focal, ImageSize size);

/// Nearest rotation in Frobenius norm (SVD projection with det fixed to +1).
Mat3 nearest_rotation(const Mat3& m);

/// Chordal distance ||R1 - R2||_F.
double rotation_distance(const Mat3& a, const Mat3& b);

}  // namespace gsr
