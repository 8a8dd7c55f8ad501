#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace serex {

/// 3D point in meters, world frame. Double precision throughout: the planner
/// compares path lengths and scores at 1e-9 tolerances.
using Point3 = Eigen::Vector3d;

using KeyframeId = std::uint32_t;

inline bool is_finite(const Point3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

/// Wraps an angle into (-pi, pi]. Exactly -pi maps to +pi.
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

/// Position plus heading. Yaw is kept wrapped in (-pi, pi].
struct Pose {
  Point3 position{Point3::Zero()};
  double yaw = 0.0;
};

/// A pose at which a scan was registered into the map. Ids are assigned by
/// MapStore in strictly increasing order with no gaps.
struct Keyframe {
  KeyframeId id = 0;
  Point3 position{Point3::Zero()};
  int step = 0;
};

/// World-frame hit points generated from one keyframe.
struct Scan {
  KeyframeId keyframe_id = 0;
  std::vector<Point3> points;
};

/// A map point that remembers which keyframe generated it.
struct TaggedPoint {
  Point3 point{Point3::Zero()};
  KeyframeId keyframe_id = 0;
};

/// Paired keyframe/scan storage: keyframes[i] generated scans[i]. Append-only;
/// entries are never edited, so (point, keyframe) provenance stays valid for
/// the lifetime of the store.
class MapStore {
 public:
  /// Appends a keyframe and its scan as a pair, assigning the next id.
  KeyframeId add_keyframe(const Point3& position, int step,
                          std::vector<Point3> scan_points) {
    const KeyframeId id = static_cast<KeyframeId>(keyframes_.size());
    keyframes_.push_back(Keyframe{id, position, step});
    scans_.push_back(Scan{id, std::move(scan_points)});
    return id;
  }

  std::size_t size() const { return keyframes_.size(); }
  bool empty() const { return keyframes_.empty(); }

  const std::vector<Keyframe>& keyframes() const { return keyframes_; }
  const std::vector<Scan>& scans() const { return scans_; }

  const Keyframe& keyframe(KeyframeId id) const {
    if (id >= keyframes_.size()) throw std::invalid_argument("unknown keyframe id");
    return keyframes_[id];
  }
  const Scan& scan(KeyframeId id) const {
    if (id >= scans_.size()) throw std::invalid_argument("unknown keyframe id");
    return scans_[id];
  }
  const Keyframe& latest() const {
    if (keyframes_.empty()) throw std::logic_error("empty map store");
    return keyframes_.back();
  }

 private:
  std::vector<Keyframe> keyframes_;
  std::vector<Scan> scans_;
};

}  // namespace serex
