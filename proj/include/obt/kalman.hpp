#pragma once

#include <Eigen/Dense>

#include "obt/geometry.hpp"

namespace obt {

// How the two size slots of the motion state are defined.
// AREA_ASPECT: s1 = w*h (px^2), s2 = w/h. WIDTH_HEIGHT: s1 = w, s2 = h (px).
enum class SizeParam { AREA_ASPECT, WIDTH_HEIGHT };

using StateVector = Eigen::Matrix<double, 10, 1>;
using StateMatrix = Eigen::Matrix<double, 10, 10>;

// Constant-velocity state over [u, v, s1, s2, theta] and their per-frame
// velocities; theta stays canonical (le135) through predict and update.
struct MotionState {
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Zero();
  SizeParam size_param = SizeParam::WIDTH_HEIGHT;
};

// Noise model. Pose/size standard deviations may be size-relative (scaled by
// the mean of s1 and s2 at use, ByteTrack-style) or absolute.
struct FilterParams {
  Eigen::Matrix<double, 10, 1> process_noise;      // per-component std
  Eigen::Matrix<double, 5, 1> measurement_noise;   // per-component std
  Eigen::Matrix<double, 5, 1> initial_velocity_variance;
  bool size_relative = false;  // scale non-angle pose/size stds by mean(s1, s2)

  static FilterParams defaults(SizeParam size_param);
};

// Measurement-space <-> size-parameter conversions.
Eigen::Matrix<double, 5, 1> box_to_measurement(const OrientedBox& box, SizeParam size_param);

MotionState init_state(const OrientedBox& box, const FilterParams& params, SizeParam size_param);

MotionState predict(const MotionState& state, const FilterParams& params);

MotionState update(const MotionState& state, const OrientedBox& measurement,
                   const FilterParams& params);

OrientedBox state_to_box(const MotionState& state);

}  // namespace obt
