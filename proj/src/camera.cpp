#include "gsr/camera.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace gsr {

Mat3 CameraParams::K() const {
  Mat3 k;
  k << fx, skew, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Mat34 CameraParams::Rt() const {
  Mat34 m;
  m.leftCols<3>() = R;
  m.col(3) = t;
  return m;
}

CameraParams CameraParams::from_K_Rt(const Mat3& K, const Mat34& Rt) {
  CameraParams cam;
  cam.fx = K(0, 0);
  cam.fy = K(1, 1);
  cam.cx = K(0, 2);
  cam.cy = K(1, 2);
  cam.skew = K(0, 1);
  cam.R = Rt.leftCols<3>();
  cam.t = Rt.col(3);
  return cam;
}

bool is_valid(const CameraParams& cam, double tol) {
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) return false;
  if (!cam.R.allFinite() || !cam.t.allFinite()) return false;
  if ((cam.R.transpose() * cam.R - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(cam.R.determinant() - 1.0) > tol) return false;
  return cam.center().z() > 0.0;
}

Mat3 rotation_from_pan_tilt_roll(double pan, double tilt, double roll) {
  const Vec3 forward(std::sin(pan) * std::cos(tilt), std::cos(pan) * std::cos(tilt),
                     std::sin(tilt));
  const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  const Mat3 roll_m = Eigen::AngleAxisd(roll, Vec3::UnitZ()).toRotationMatrix();
  return roll_m * r;
}

CameraParams make_camera(const Vec3& center, double pan, double tilt, double roll,
                         double focal, ImageSize size) {
  CameraParams cam;
  cam.fx = cam.fy = focal;
  cam.cx = size.width / 2.0;
  cam.cy = size.height / 2.0;
  cam.R = rotation_from_pan_tilt_roll(pan, tilt, roll);
  cam.t = -cam.R * center;
  return cam;
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

double rotation_distance(const Mat3& a, const Mat3& b) { return (a - b).norm(); }

}  // namespace gsr
