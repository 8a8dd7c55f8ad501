#pragma once

#include "serex/core/types.hpp"
#include "serex/core/voxel.hpp"

#include <cstdint>
#include <deque>
#include <unordered_set>
#include <vector>

namespace serex {

/// Axis-aligned box in meters.
struct Aabb {
  Point3 min{Point3::Zero()};
  Point3 max{Point3::Zero()};

  bool contains(const Point3& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
           p.y() <= max.y() && p.z() >= min.z() && p.z() <= max.z();
  }
};

/// Voxelized occupancy world.
///
/// Occupancy is authored as axis-aligned boxes and rasterized at construction:
/// a voxel is occupied iff its center lies inside some box. Membership tests
/// (bounds, occupancy) are all center-based so the world is exactly the set of
/// voxels, which keeps ground-truth coverage bookkeeping exact.
class Environment {
 public:
  Environment() = default;

  Environment(double voxel_size, const Aabb& bounds,
              const std::vector<Aabb>& occupied_boxes)
      : voxel_size_(voxel_size), bounds_(bounds) {
    for (const auto& box : occupied_boxes) {
      const VoxelKey lo = voxel_key_of(box.min, voxel_size_);
      const VoxelKey hi = voxel_key_of(box.max, voxel_size_);
      for (std::int64_t z = lo.z; z <= hi.z; ++z) {
        for (std::int64_t y = lo.y; y <= hi.y; ++y) {
          for (std::int64_t x = lo.x; x <= hi.x; ++x) {
            const VoxelKey key{x, y, z};
            const Point3 c = center_of(key);
            if (box.contains(c) && bounds_.contains(c)) occupied_.insert(key);
          }
        }
      }
    }
  }

  double voxel_size() const { return voxel_size_; }
  const Aabb& bounds() const { return bounds_; }
  std::size_t occupied_count() const { return occupied_.size(); }

  Point3 center_of(const VoxelKey& key) const {
    return Point3{(static_cast<double>(key.x) + 0.5) * voxel_size_,
                  (static_cast<double>(key.y) + 0.5) * voxel_size_,
                  (static_cast<double>(key.z) + 0.5) * voxel_size_};
  }

  bool in_bounds(const VoxelKey& key) const {
    return bounds_.contains(center_of(key));
  }
  bool is_occupied(const VoxelKey& key) const {
    return occupied_.count(key) > 0;
  }
  bool is_free(const VoxelKey& key) const {
    return in_bounds(key) && !is_occupied(key);
  }
  bool is_free_at(const Point3& p) const {
    return is_free(voxel_key_of(p, voxel_size_));
  }

  /// 6-connected flood fill from the start voxel through free in-bounds
  /// voxels. Computed once per world; every coverage metric is taken over
  /// this set.
  void compute_reachability(const Point3& start) {
    free_reachable_.clear();
    const VoxelKey s = voxel_key_of(start, voxel_size_);
    if (!is_free(s)) return;
    std::deque<VoxelKey> frontier{s};
    free_reachable_.insert(s);
    while (!frontier.empty()) {
      const VoxelKey cur = frontier.front();
      frontier.pop_front();
      const VoxelKey neighbors[6] = {
          {cur.x + 1, cur.y, cur.z}, {cur.x - 1, cur.y, cur.z},
          {cur.x, cur.y + 1, cur.z}, {cur.x, cur.y - 1, cur.z},
          {cur.x, cur.y, cur.z + 1}, {cur.x, cur.y, cur.z - 1}};
      for (const auto& n : neighbors) {
        if (is_free(n) && free_reachable_.insert(n).second) {
          frontier.push_back(n);
        }
      }
    }
  }

  const std::unordered_set<VoxelKey, VoxelKeyHash>& free_reachable() const {
    return free_reachable_;
  }

 private:
  double voxel_size_ = 0.5;
  Aabb bounds_;
  std::unordered_set<VoxelKey, VoxelKeyHash> occupied_;
  std::unordered_set<VoxelKey, VoxelKeyHash> free_reachable_;
};

}  // namespace serex
