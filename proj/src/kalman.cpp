#include "petbench/kalman.hpp"

#include <cmath>

#include "petbench/errors.hpp"

namespace petbench {

namespace {

Mat6 transition(double dt) {
  Mat6 F = Mat6::Identity();
  F.topRightCorner<3, 3>() = dt * Eigen::Matrix3d::Identity();
  return F;
}

// Discretized white-acceleration noise.
Mat6 process_noise(double q, double dt) {
  const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt;
  Mat6 Q = Mat6::Zero();
  const auto I = Eigen::Matrix3d::Identity();
  Q.topLeftCorner<3, 3>() = dt4 / 4.0 * I;
  Q.topRightCorner<3, 3>() = dt3 / 2.0 * I;
  Q.bottomLeftCorner<3, 3>() = dt3 / 2.0 * I;
  Q.bottomRightCorner<3, 3>() = dt2 * I;
  return q * Q;
}

void check_dt(double dt_s) {
  if (!std::isfinite(dt_s) || dt_s <= 0) throw ValidationError("kalman dt must be positive and finite");
}

}  // namespace

KalmanState KalmanState::at(const Vec3& position, double q, double r) {
  KalmanState k;
  k.state.head<3>() = position;
  k.process_noise_q = q;
  k.measurement_noise_r = r;
  return k;
}

Vec3 kalman_predict(KalmanState& k, double dt_s) {
  check_dt(dt_s);
  const Mat6 F = transition(dt_s);
  k.state = F * k.state;
  k.covariance = F * k.covariance * F.transpose() + process_noise(k.process_noise_q, dt_s);
  k.covariance = (0.5 * (k.covariance + k.covariance.transpose())).eval();
  return k.position();
}

Vec3 kalman_peek(const KalmanState& k, double dt_s) {
  check_dt(dt_s);
  return k.position() + dt_s * k.velocity();
}

void kalman_update(KalmanState& k, const Vec3& z) {
  if (!z.allFinite()) throw ValidationError("kalman measurement must be finite");
  Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
  H.leftCols<3>() = Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d R = k.measurement_noise_r * k.measurement_noise_r * Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d S = H * k.covariance * H.transpose() + R;
  const Eigen::Matrix<double, 6, 3> K = k.covariance * H.transpose() * S.inverse();
  k.state += K * (z - H * k.state);
  // Joseph form keeps the covariance symmetric positive semidefinite.
  const Mat6 A = Mat6::Identity() - K * H;
  k.covariance = A * k.covariance * A.transpose() + K * R * K.transpose();
  k.covariance = (0.5 * (k.covariance + k.covariance.transpose())).eval();
}

}  // namespace petbench
