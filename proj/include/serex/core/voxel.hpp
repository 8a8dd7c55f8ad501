#pragma once

#include "serex/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace serex {

/// Integer voxel coordinate. The grid is anchored at the world origin with
/// half-open cells [n*v, (n+1)*v) per axis.
struct VoxelKey {
  std::int64_t x = 0, y = 0, z = 0;

  bool operator==(const VoxelKey& o) const {
    return x == o.x && y == o.y && z == o.z;
  }
  /// z-major, then y, then x.
  bool operator<(const VoxelKey& o) const {
    if (z != o.z) return z < o.z;
    if (y != o.y) return y < o.y;
    return x < o.x;
  }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    constexpr std::size_t p1 = 73856093ULL;
    constexpr std::size_t p2 = 19349669ULL;
    constexpr std::size_t p3 = 83492791ULL;
    return (static_cast<std::size_t>(k.x) * p1) ^
           (static_cast<std::size_t>(k.y) * p2) ^
           (static_cast<std::size_t>(k.z) * p3);
  }
};

inline VoxelKey voxel_key_of(const Point3& p, double voxel_size) {
  return VoxelKey{static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
                  static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
                  static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

/// Keeps one representative per occupied voxel of side v_down: the first point
/// inserted into the voxel, preserving its keyframe tag. The representative is
/// a real map point, not the voxel center, so contribution counting downstream
/// still has a valid (point, keyframe) pair. Output is sorted by voxel key
/// (z-major, then y, then x).
inline std::vector<TaggedPoint> voxel_downsample(
    const std::vector<TaggedPoint>& points, double v_down) {
  if (!(v_down > 0.0)) throw std::invalid_argument("v_down must be positive");

  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> first_in_voxel;
  first_in_voxel.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    first_in_voxel.emplace(voxel_key_of(points[i].point, v_down), i);
  }

  std::vector<std::pair<VoxelKey, std::size_t>> cells(first_in_voxel.begin(),
                                                      first_in_voxel.end());
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<TaggedPoint> out;
  out.reserve(cells.size());
  for (const auto& [key, idx] : cells) out.push_back(points[idx]);
  return out;
}

}  // namespace serex
