#pragma once

#include <Eigen/Core>

#include "gsr/athlete.hpp"

namespace gsr {

/// Constant-velocity Kalman filter over (cx, cy, aspect, h) and their
/// velocities, with noise proportional to the box height.
class BoxKalmanFilter {
 public:
  using Mean = Eigen::Matrix<double, 8, 1>;
  using Covariance = Eigen::Matrix<double, 8, 8>;
  using Measurement = Eigen::Vector4d;

  struct State {
    Mean mean = Mean::Zero();
    Covariance covariance = Covariance::Identity();
  };

  double stdWeightPosition = 1.0 / 20.0;
  double stdWeightVelocity = 1.0 / 160.0;

  State initiate(const Measurement& z) const;
  void predict(State& s) const;
  void update(State& s, const Measurement& z) const;
  /// Squared Mahalanobis distance of z from the projected state.
  double gating_distance(const State& s, const Measurement& z) const;

  /// Observation model (first four state components) and its noise.
  Eigen::Matrix4d measurement_noise(const Mean& mean) const;
  Eigen::Matrix<double, 8, 8> process_noise(const Mean& mean) const;

  static Measurement to_measurement(const BBox& box);
  static BBox to_bbox(const Mean& mean);
};

}  // namespace gsr
