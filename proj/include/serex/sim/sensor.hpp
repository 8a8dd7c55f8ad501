#pragma once

#include "serex/core/types.hpp"
#include "serex/sim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace serex {

/// Spinning-LiDAR model: a fixed angular lattice of channels x azimuth_steps
/// rays. No noise by default; noise_sigma > 0 adds seeded Gaussian range
/// noise for robustness experiments.
struct SensorModel {
  double hfov_deg = 360.0;
  double vfov_deg = 45.0;
  int channels = 32;
  int azimuth_steps = 512;
  double max_range = 80.0;
  double noise_sigma = 0.0;
};

namespace detail {

/// First occupied-voxel hit along a single ray, via Amanatides & Woo grid
/// traversal. Returns the ray parameter at which the occupied voxel was
/// entered (so the hit point lies on a voxel face), or nothing on a miss.
inline bool raycast_dda(const Environment& env, const Point3& origin,
                        const Point3& dir, double max_range, double& t_hit) {
  const double vs = env.voxel_size();
  VoxelKey cur = voxel_key_of(origin, vs);

  std::int64_t step[3];
  double t_max[3];
  double t_delta[3];
  const double inf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double d = dir[a];
    const double o = origin[a];
    const std::int64_t v = (a == 0) ? cur.x : (a == 1) ? cur.y : cur.z;
    if (d > 0.0) {
      step[a] = 1;
      t_max[a] = ((static_cast<double>(v) + 1.0) * vs - o) / d;
      t_delta[a] = vs / d;
    } else if (d < 0.0) {
      step[a] = -1;
      t_max[a] = (static_cast<double>(v) * vs - o) / d;
      t_delta[a] = vs / -d;
    } else {
      step[a] = 0;
      t_max[a] = inf;
      t_delta[a] = inf;
    }
  }

  while (true) {
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    const double t = t_max[axis];
    if (t > max_range) return false;

    if (axis == 0) cur.x += step[0];
    else if (axis == 1) cur.y += step[1];
    else cur.z += step[2];
    t_max[axis] += t_delta[axis];

    if (!env.in_bounds(cur)) return false;  // ray left the world
    if (env.is_occupied(cur)) {
      t_hit = t;
      return true;
    }
  }
}

}  // namespace detail

/// Casts the full angular lattice from `pose` and returns the hit points in
/// world frame. Ray order is elevation-major (lowest channel first), azimuth-
/// minor, which fixes the point order; rays that exceed max_range or leave the
/// world contribute no point.
///
/// Azimuth spans hfov centered on yaw. A full 360-degree sweep is treated as
/// periodic (no duplicate ray at the seam); narrower sweeps include both
/// endpoints. Elevation spans vfov centered on the horizontal.
inline Scan raycast_scan(const Environment& env, const Pose& pose,
                         const SensorModel& sensor,
                         std::mt19937_64* rng = nullptr) {
  if (env.is_occupied(voxel_key_of(pose.position, env.voxel_size()))) {
    throw std::logic_error("raycast_scan: pose inside occupied voxel");
  }

  constexpr double deg = M_PI / 180.0;
  std::vector<double> elevations;
  elevations.reserve(sensor.channels);
  if (sensor.channels == 1) {
    elevations.push_back(0.0);
  } else {
    const double half = 0.5 * sensor.vfov_deg * deg;
    const double span = sensor.vfov_deg * deg;
    for (int i = 0; i < sensor.channels; ++i) {
      elevations.push_back(-half + span * i / (sensor.channels - 1));
    }
  }

  std::vector<double> azimuths;
  azimuths.reserve(sensor.azimuth_steps);
  const bool full_circle = sensor.hfov_deg >= 360.0;
  if (sensor.azimuth_steps == 1) {
    azimuths.push_back(pose.yaw);
  } else if (full_circle) {
    const double step = 2.0 * M_PI / sensor.azimuth_steps;
    for (int j = 0; j < sensor.azimuth_steps; ++j) {
      azimuths.push_back(pose.yaw - M_PI + step * j);
    }
  } else {
    const double half = 0.5 * sensor.hfov_deg * deg;
    const double span = sensor.hfov_deg * deg;
    for (int j = 0; j < sensor.azimuth_steps; ++j) {
      azimuths.push_back(pose.yaw - half + span * j / (sensor.azimuth_steps - 1));
    }
  }

  std::normal_distribution<double> noise(0.0, sensor.noise_sigma);

  Scan scan;
  scan.points.reserve(static_cast<std::size_t>(sensor.channels) *
                      sensor.azimuth_steps / 4);
  for (const double e : elevations) {
    const double ce = std::cos(e), se = std::sin(e);
    for (const double a : azimuths) {
      const Point3 dir{ce * std::cos(a), ce * std::sin(a), se};
      double t = 0.0;
      if (!detail::raycast_dda(env, pose.position, dir, sensor.max_range, t)) {
        continue;
      }
      if (sensor.noise_sigma > 0.0 && rng != nullptr) {
        t = std::clamp(t + noise(*rng), 0.0, sensor.max_range);
      }
      scan.points.push_back(pose.position + t * dir);
    }
  }
  return scan;
}

}  // namespace serex
