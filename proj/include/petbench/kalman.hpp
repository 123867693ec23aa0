#pragma once

#include <Eigen/Core>

#include "petbench/geometry.hpp"

namespace petbench {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Constant-velocity filter over 3D position. State is (position, velocity)
/// in meters and m/s; measurements are positions only.
struct KalmanState {
  Vec6 state = Vec6::Zero();
  Mat6 covariance = Mat6::Identity();
  double process_noise_q = 1e-2;      // white-acceleration spectral density
  double measurement_noise_r = 1e-3;  // measurement std-dev, meters

  static KalmanState at(const Vec3& position, double q = 1e-2, double r = 1e-3);

  Vec3 position() const { return state.head<3>(); }
  Vec3 velocity() const { return state.tail<3>(); }
};

/// Propagates the filter by dt seconds and returns the predicted position.
/// Throws ValidationError for non-positive or non-finite dt.
Vec3 kalman_predict(KalmanState& k, double dt_s);

/// Position that kalman_predict would produce, without mutating the filter.
Vec3 kalman_peek(const KalmanState& k, double dt_s);

void kalman_update(KalmanState& k, const Vec3& measurement);

}  // namespace petbench
