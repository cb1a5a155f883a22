#include "gsr/kalman.hpp"

#include <Eigen/Cholesky>

namespace gsr {

namespace {

Eigen::Matrix<double, 8, 8> transition() {
  Eigen::Matrix<double, 8, 8> F = Eigen::Matrix<double, 8, 8>::Identity();
  for (int i = 0; i < 4; ++i) F(i, i + 4) = 1.0;
  return F;
}

}  // namespace

BoxKalmanFilter::Measurement BoxKalmanFilter::to_measurement(const BBox& b) {
  return {b.center_x(), b.center_y(), b.width / b.height, b.height};
}

BBox BoxKalmanFilter::to_bbox(const Mean& m) {
  const double h = m(3);
  const double w = m(2) * h;
  return {m(0) - w / 2, m(1) - h / 2, w, h};
}

BoxKalmanFilter::State BoxKalmanFilter::initiate(const Measurement& z) const {
  State s;
  s.mean.head<4>() = z;
  s.mean.tail<4>().setZero();
  const double h = z(3);
  Mean std;
  std << 2 * stdWeightPosition * h, 2 * stdWeightPosition * h, 1e-2, 2 * stdWeightPosition * h,
      10 * stdWeightVelocity * h, 10 * stdWeightVelocity * h, 1e-5, 10 * stdWeightVelocity * h;
  s.covariance = std.array().square().matrix().asDiagonal();
  return s;
}

Eigen::Matrix<double, 8, 8> BoxKalmanFilter::process_noise(const Mean& m) const {
  const double h = m(3);
  Mean std;
  std << stdWeightPosition * h, stdWeightPosition * h, 1e-2, stdWeightPosition * h,
      stdWeightVelocity * h, stdWeightVelocity * h, 1e-5, stdWeightVelocity * h;
  return std.array().square().matrix().asDiagonal();
}

Eigen::Matrix4d BoxKalmanFilter::measurement_noise(const Mean& m) const {
  const double h = m(3);
  Eigen::Vector4d std(stdWeightPosition * h, stdWeightPosition * h, 1e-1, stdWeightPosition * h);
  return std.array().square().matrix().asDiagonal();
}

void BoxKalmanFilter::predict(State& s) const {
  static const Eigen::Matrix<double, 8, 8> F = transition();
  const auto Q = process_noise(s.mean);
  s.mean = F * s.mean;
  s.covariance = F * s.covariance * F.transpose() + Q;
}

void BoxKalmanFilter::update(State& s, const Measurement& z) const {
  const Eigen::Matrix4d S = s.covariance.topLeftCorner<4, 4>() + measurement_noise(s.mean);
  // Observation matrix picks the first four state entries, so P H^T is the
  // left 8x4 block of P.
  const Eigen::Matrix<double, 8, 4> PHt = s.covariance.leftCols<4>();
  const Eigen::Matrix<double, 8, 4> gain = S.llt().solve(PHt.transpose()).transpose();
  s.mean += gain * (z - s.mean.head<4>());
  s.covariance -= gain * S * gain.transpose();
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
}

double BoxKalmanFilter::gating_distance(const State& s, const Measurement& z) const {
  const Eigen::Matrix4d S = s.covariance.topLeftCorner<4, 4>() + measurement_noise(s.mean);
  const Eigen::Vector4d d = z - s.mean.head<4>();
  return d.dot(S.llt().solve(d));
}

}  // namespace gsr
