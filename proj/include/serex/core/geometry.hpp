#pragma once

#include "serex/core/types.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace serex {

/// Distance from p to the segment [a, b].
///
/// If the foot of the perpendicular from p falls inside the segment (the
/// vectors from both endpoints toward p form acute angles with the segment),
/// this is the perpendicular distance to the line; otherwise it is the
/// distance to the nearer endpoint. Degenerate a == b gives ||p - a||.
inline double point_segment_distance(const Point3& p, const Point3& a,
                                     const Point3& b) {
  const Point3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = (p - a).dot(ab) / len2;
  if (t <= 0.0) return (p - a).norm();
  if (t >= 1.0) return (p - b).norm();
  return (p - (a + t * ab)).norm();
}

/// Component-wise arithmetic mean. Empty input is a parameter error: callers
/// only form centroids of non-empty clusters.
inline Point3 centroid(const std::vector<Point3>& points) {
  if (points.empty()) throw std::invalid_argument("centroid of empty point set");
  Point3 sum = Point3::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

/// Heading of the horizontal (x, y) displacement from `from` to `to`, in
/// (-pi, pi]. Returns `fallback` when the displacement is purely vertical.
inline double horizontal_bearing(const Point3& from, const Point3& to,
                                 double fallback) {
  const double dx = to.x() - from.x();
  const double dy = to.y() - from.y();
  if (dx == 0.0 && dy == 0.0) return fallback;
  return wrap_angle(std::atan2(dy, dx));
}

}  // namespace serex
