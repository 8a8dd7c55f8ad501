#pragma once

#include "serex/core/errors.hpp"
#include "serex/core/geometry.hpp"
#include "serex/core/types.hpp"
#include "serex/sim/environment.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace serex {

/// Kinematic point robot. Yaw snaps to the direction of travel.
struct RobotState {
  Pose pose;
  double speed = 0.0;
  double distance_traveled = 0.0;
  int step = 0;
};

/// Distance-triggered keyframe generation.
struct KeyframePolicy {
  double d_key = 2.0;
};

/// True iff no keyframe exists yet, or the robot has translated at least
/// d_key since the last one (>= comparison, so the threshold itself triggers).
inline bool maybe_generate_keyframe(const RobotState& state,
                                    const std::optional<Point3>& last_kf_position,
                                    const KeyframePolicy& policy) {
  if (!last_kf_position) return true;
  return (state.pose.position - *last_kf_position).norm() >= policy.d_key;
}

/// Moves at most v_max*dt along the straight line toward the waypoint. Yaw
/// follows the horizontal bearing of the displacement; purely vertical moves
/// keep the current yaw.
inline RobotState step_robot(const RobotState& state, const Point3& waypoint,
                             double dt, double v_max) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be positive");

  RobotState next = state;
  next.step = state.step + 1;

  const Point3 delta = waypoint - state.pose.position;
  const double dist = delta.norm();
  if (dist == 0.0) {
    next.speed = 0.0;
    return next;
  }

  const double move = std::min(dist, v_max * dt);
  next.pose.position = state.pose.position + delta * (move / dist);
  next.pose.yaw = horizontal_bearing(state.pose.position, waypoint, state.pose.yaw);
  next.distance_traveled = state.distance_traveled + move;
  next.speed = move / dt;
  return next;
}

/// As above, but fails with CollisionError if the motion ends inside an
/// occupied voxel. The episode loop uses this variant.
inline RobotState step_robot(const RobotState& state, const Point3& waypoint,
                             double dt, double v_max, const Environment& env) {
  RobotState next = step_robot(state, waypoint, dt, v_max);
  if (env.is_occupied(voxel_key_of(next.pose.position, env.voxel_size()))) {
    throw CollisionError("robot entered occupied voxel at step " +
                         std::to_string(next.step));
  }
  return next;
}

}  // namespace serex
