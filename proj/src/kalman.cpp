#include "obt/kalman.hpp"

#include <cmath>
#include <stdexcept>

namespace obt {

namespace {

constexpr double kSizeFloor = 1e-3;  // px or px^2, applied after predict

// Pose/size std scale factor. Relative mode mirrors the ByteTrack convention
// of sizing the noise to the object.
double pose_scale(const MotionState& state, const FilterParams& params) {
  if (!params.size_relative) return 1.0;
  return 0.5 * (state.mean(2) + state.mean(3));
}

Eigen::Matrix<double, 10, 10> transition() {
  Eigen::Matrix<double, 10, 10> f = Eigen::Matrix<double, 10, 10>::Identity();
  for (int i = 0; i < 5; ++i) f(i, i + 5) = 1.0;  // dt = 1 frame
  return f;
}

Eigen::Matrix<double, 10, 10> process_cov(const MotionState& state, const FilterParams& params) {
  const double s = pose_scale(state, params);
  Eigen::Matrix<double, 10, 1> stds = params.process_noise;
  for (int i : {0, 1, 2, 3, 5, 6, 7, 8}) stds(i) *= s;  // angle slots stay absolute
  return stds.cwiseProduct(stds).asDiagonal();
}

Eigen::Matrix<double, 5, 5> measurement_cov(const MotionState& state, const FilterParams& params) {
  const double s = pose_scale(state, params);
  Eigen::Matrix<double, 5, 1> stds = params.measurement_noise;
  for (int i : {0, 1, 2, 3}) stds(i) *= s;
  return stds.cwiseProduct(stds).asDiagonal();
}

void symmetrize(StateMatrix& p) { p = 0.5 * (p + p.transpose()).eval(); }

}  // namespace

FilterParams FilterParams::defaults(SizeParam size_param) {
  FilterParams p;
  if (size_param == SizeParam::WIDTH_HEIGHT) {
    p.size_relative = true;
    const double pose = 1.0 / 20.0, vel = 1.0 / 160.0;
    p.process_noise << pose, pose, pose, pose, 0.01, vel, vel, vel, vel, 0.01 / 8.0;
    p.measurement_noise << pose, pose, pose, pose, 0.1;
  } else {
    p.size_relative = false;
    p.process_noise << 1.0, 1.0, 10.0, 0.01, 0.01,
        1.0 / 4.0, 1.0 / 4.0, 10.0 / 4.0, 0.01 / 4.0, 0.01 / 4.0;
    p.measurement_noise << 1.0, 1.0, 10.0, 0.01, 0.1;
  }
  // Loose velocity prior so the filter locks onto motion within two frames.
  for (int i = 0; i < 5; ++i) {
    const double s = 10.0 * p.measurement_noise(i);
    p.initial_velocity_variance(i) = s * s;
  }
  return p;
}

Eigen::Matrix<double, 5, 1> box_to_measurement(const OrientedBox& box, SizeParam size_param) {
  Eigen::Matrix<double, 5, 1> z;
  if (size_param == SizeParam::AREA_ASPECT) {
    z << box.cx, box.cy, box.w * box.h, box.w / box.h, box.angle.radians();
  } else {
    z << box.cx, box.cy, box.w, box.h, box.angle.radians();
  }
  return z;
}

MotionState init_state(const OrientedBox& box, const FilterParams& params, SizeParam size_param) {
  if (!(box.w > 0.0) || !(box.h > 0.0)) {
    throw std::domain_error("init_state: non-positive box size");
  }
  MotionState state;
  state.size_param = size_param;
  state.mean.head<5>() = box_to_measurement(box, size_param);

  const Eigen::Matrix<double, 5, 5> r = measurement_cov(state, params);
  StateMatrix p = StateMatrix::Zero();
  p.topLeftCorner<5, 5>() = 4.0 * r;
  p.bottomRightCorner<5, 5>() = params.initial_velocity_variance.asDiagonal();
  if (params.size_relative) {
    const double s2 = pose_scale(state, params) * pose_scale(state, params);
    for (int i = 0; i < 4; ++i) p(5 + i, 5 + i) *= s2;
  }
  state.covariance = p;
  return state;
}

MotionState predict(const MotionState& state, const FilterParams& params) {
  const auto f = transition();
  MotionState out = state;
  out.mean = f * state.mean;
  out.mean(4) = canonicalize_angle(out.mean(4));
  if (out.mean(2) < kSizeFloor) out.mean(2) = kSizeFloor;
  if (out.mean(3) < kSizeFloor) out.mean(3) = kSizeFloor;
  out.covariance = f * state.covariance * f.transpose() + process_cov(state, params);
  symmetrize(out.covariance);
  return out;
}

MotionState update(const MotionState& state, const OrientedBox& measurement,
                   const FilterParams& params) {
  Eigen::Matrix<double, 5, 10> h = Eigen::Matrix<double, 5, 10>::Zero();
  h.leftCols<5>() = Eigen::Matrix<double, 5, 5>::Identity();

  const Eigen::Matrix<double, 5, 1> z = box_to_measurement(measurement, state.size_param);
  Eigen::Matrix<double, 5, 1> innovation = z - h * state.mean;
  // The angle lives on a circle of period pi; take the wrapped residual.
  innovation(4) =
      angle_residual(measurement.angle, Angle::from_radians(state.mean(4)));

  const Eigen::Matrix<double, 5, 5> s =
      h * state.covariance * h.transpose() + measurement_cov(state, params);
  Eigen::FullPivLU<Eigen::Matrix<double, 5, 5>> lu(s);
  if (!lu.isInvertible()) {
    throw std::runtime_error("update: singular innovation covariance");
  }
  const Eigen::Matrix<double, 10, 5> k = state.covariance * h.transpose() * lu.inverse();

  MotionState out = state;
  out.mean = state.mean + k * innovation;
  out.mean(4) = canonicalize_angle(out.mean(4));
  // Joseph form keeps the posterior PSD under roundoff.
  const StateMatrix ikh = StateMatrix::Identity() - k * h;
  out.covariance =
      ikh * state.covariance * ikh.transpose() + k * measurement_cov(state, params) * k.transpose();
  symmetrize(out.covariance);
  return out;
}

OrientedBox state_to_box(const MotionState& state) {
  const double s1 = state.mean(2), s2 = state.mean(3);
  if (!(s1 > 0.0) || !(s2 > 0.0)) {
    throw std::runtime_error("state_to_box: degenerate size state");
  }
  double w, h;
  if (state.size_param == SizeParam::AREA_ASPECT) {
    w = std::sqrt(s1 * s2);
    h = std::sqrt(s1 / s2);
  } else {
    w = s1;
    h = s2;
  }
  return canonicalize_box(state.mean(0), state.mean(1), w, h, state.mean(4));
}

}  // namespace obt
