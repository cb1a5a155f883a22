#include "gsr/homography.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "gsr/errors.hpp"

namespace gsr {

namespace {

// Similarity moving the centroid to the origin with mean distance sqrt(2).
Mat3 hartley_normalization(const std::vector<Vec2>& pts) {
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double dist = 0.0;
  for (const auto& p : pts) dist += (p - mean).norm();
  dist /= static_cast<double>(pts.size());
  if (!(dist > 0.0)) throw DegenerateConfiguration("all points coincide");
  const double s = std::sqrt(2.0) / dist;
  Mat3 T;
  T << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return T;
}

}  // namespace

Mat3 estimate_homography_dlt(std::span<const PointCorrespondence> pairs) {
  if (pairs.size() < 4) throw DegenerateConfiguration("homography needs at least 4 pairs");
  std::vector<Vec2> world;
  std::vector<Vec2> image;
  for (const auto& p : pairs) {
    world.push_back(p.world);
    image.push_back(p.image);
  }
  const Mat3 Tw = hartley_normalization(world);
  const Mat3 Ti = hartley_normalization(image);

  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 X = Tw * world[i].homogeneous();
    const Vec3 x = Ti * image[i].homogeneous();
    const double u = x.x() / x.z();
    const double v = x.y() / x.z();
    A.block<1, 3>(2 * i, 3) = -X.transpose();
    A.block<1, 3>(2 * i, 6) = v * X.transpose();
    A.block<1, 3>(2 * i + 1, 0) = X.transpose();
    A.block<1, 3>(2 * i + 1, 6) = -u * X.transpose();
  }
  // With exactly four pairs A is 8x9; pad so the SVD exposes all nine
  // singular values.
  if (A.rows() < 9) {
    A.conservativeResize(9, Eigen::NoChange);
    A.row(8).setZero();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A homography is determined iff the null space is one-dimensional.
  if (sv(7) <= 1e-10 * sv(0)) throw DegenerateConfiguration("rank-deficient DLT system");
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  Mat3 H = Ti.inverse() * Hn * Tw;
  H /= H.norm();
  double wsum = 0.0;
  for (const auto& X : world) wsum += (H * X.homogeneous()).z();
  if (wsum < 0.0) H = -H;
  return H;
}

Mat3 compose_homography(const CameraParams& cam) {
  Mat3 m;
  m.col(0) = cam.R.col(0);
  m.col(1) = cam.R.col(1);
  m.col(2) = cam.t;
  return cam.K() * m;
}

CameraParams pose_from_homography(const Mat3& H, double focal, int imageWidth, int imageHeight) {
  const double cx = imageWidth / 2.0;
  const double cy = imageHeight / 2.0;
  Mat3 Kinv;
  Kinv << 1.0 / focal, 0, -cx / focal, 0, 1.0 / focal, -cy / focal, 0, 0, 1;
  const Mat3 M = Kinv * H;
  const double lambda = 1.0 / M.col(0).norm();
  Vec3 r1 = lambda * M.col(0);
  Vec3 r2 = lambda * M.col(1);
  Vec3 t = lambda * M.col(2);

  Mat3 R;
  R << r1, r2, r1.cross(r2);
  R = nearest_rotation(R);
  double height = -(R.transpose() * t).z();
  if (std::abs(height) <= 1e-12 * std::max(1.0, t.norm()))
    throw BehindGround("camera center lies on the ground plane");
  if (height < 0.0) {
    // Flipping the homography sign negates r1, r2 and t; r3 = r1 x r2 stays.
    r1 = -r1;
    r2 = -r2;
    t = -t;
    R << r1, r2, r1.cross(r2);
    R = nearest_rotation(R);
  }

  CameraParams cam;
  cam.fx = cam.fy = focal;
  cam.cx = cx;
  cam.cy = cy;
  cam.R = R;
  cam.t = t;
  return cam;
}

CameraParams decompose_homography(const Mat3& H, int imageWidth, int imageHeight) {
  Mat3 Tc;
  Tc << 1, 0, imageWidth / 2.0, 0, 1, imageHeight / 2.0, 0, 0, 1;
  Mat3 Hc = Tc.inverse() * H;
  Hc /= Hc.norm();
  const double a1 = Hc(0, 0), b1 = Hc(1, 0), c1 = Hc(2, 0);
  const double a2 = Hc(0, 1), b2 = Hc(1, 1), c2 = Hc(2, 1);

  // With w = 1/f^2:  r1.r2 = 0        ->  (a1 a2 + b1 b2) w + c1 c2 = 0
  //                  |r1|^2 = |r2|^2  ->  (a1^2 + b1^2 - a2^2 - b2^2) w + c1^2 - c2^2 = 0
  const double alpha1 = a1 * a2 + b1 * b2;
  const double beta1 = c1 * c2;
  const double alpha2 = a1 * a1 + b1 * b1 - a2 * a2 - b2 * b2;
  const double beta2 = c1 * c1 - c2 * c2;
  const double scale = a1 * a1 + b1 * b1 + a2 * a2 + b2 * b2;
  const double denom = alpha1 * alpha1 + alpha2 * alpha2;
  if (std::sqrt(denom) <= 1e-10 * scale)
    throw NoValidFocal("focal length is not determined by this homography");
  const double w = -(alpha1 * beta1 + alpha2 * beta2) / denom;
  if (!(w > 0.0)) throw NoValidFocal("orthonormality constraints give f^2 <= 0");
  return pose_from_homography(H, 1.0 / std::sqrt(w), imageWidth, imageHeight);
}

}  // namespace gsr
