#pragma once

#include "serex/core/geometry.hpp"
#include "serex/core/types.hpp"
#include "serex/core/voxel.hpp"

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace serex {

struct SerConfig {
  double zeta_coverage = 7.0;
  double v_down = 2.0;
  double cluster_tol = 4.0;     // default 2 * v_down
  int min_cluster_size = 3;
};

/// Downsampled map split into covered/uncovered by keyframe proximity.
struct CoveragePartition {
  std::vector<TaggedPoint> covered;
  std::vector<TaggedPoint> uncovered;
};

/// A connected cluster of uncovered map points. Its centroid is the frontier
/// the robot targets to cover it; volume is the cluster's point count.
struct SER {
  int id = 0;
  std::vector<TaggedPoint> points;
  Point3 frontier{Point3::Zero()};
  std::size_t volume = 0;
};

struct SerSet {
  std::vector<SER> sers;
  int source_step = 0;

  bool empty() const { return sers.empty(); }
};

/// A point is covered iff it lies within zeta (inclusive) of at least one
/// keyframe position. Input order is preserved in both output lists; with no
/// keyframes everything is uncovered.
inline CoveragePartition partition_coverage(const std::vector<TaggedPoint>& points,
                                            const std::vector<Keyframe>& keyframes,
                                            double zeta) {
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
  const double zeta2 = zeta * zeta;

  CoveragePartition out;
  for (const auto& tp : points) {
    bool covered = false;
    for (const auto& kf : keyframes) {
      if ((kf.position - tp.point).squaredNorm() <= zeta2) {
        covered = true;
        break;
      }
    }
    (covered ? out.covered : out.uncovered).push_back(tp);
  }
  return out;
}

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b < a ? a : b] = (b < a ? b : a);
  }
};

}  // namespace detail

/// Single-link Euclidean clustering: connected components of the graph whose
/// edges join point pairs within tol. Components smaller than min_size are
/// discarded. Clusters come out ordered by their lowest member's input index;
/// members keep input order. Pair search is grid-bucketed at cell size tol so
/// only the 27 neighboring cells are scanned per point.
inline std::vector<std::vector<TaggedPoint>> cluster_uncovered(
    const std::vector<TaggedPoint>& uncovered, double tol, int min_size) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (min_size < 1) throw std::invalid_argument("min_size must be >= 1");

  const std::size_t n = uncovered.size();
  detail::UnionFind uf(n);

  std::unordered_map<VoxelKey, std::vector<std::size_t>, VoxelKeyHash> cells;
  cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cells[voxel_key_of(uncovered[i].point, tol)].push_back(i);
  }

  const double tol2 = tol * tol;
  for (std::size_t i = 0; i < n; ++i) {
    const VoxelKey c = voxel_key_of(uncovered[i].point, tol);
    for (std::int64_t dz = -1; dz <= 1; ++dz) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const auto it = cells.find(VoxelKey{c.x + dx, c.y + dy, c.z + dz});
          if (it == cells.end()) continue;
          for (const std::size_t j : it->second) {
            if (j >= i) continue;
            if ((uncovered[i].point - uncovered[j].point).squaredNorm() <= tol2) {
              uf.unite(i, j);
            }
          }
        }
      }
    }
  }

  // Group by root, keyed by each component's lowest member index.
  std::unordered_map<std::size_t, std::size_t> root_to_slot;
  std::vector<std::vector<TaggedPoint>> clusters;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = uf.find(i);
    auto [it, inserted] = root_to_slot.try_emplace(root, clusters.size());
    if (inserted) clusters.emplace_back();
    clusters[it->second].push_back(uncovered[i]);
  }

  std::vector<std::vector<TaggedPoint>> kept;
  for (auto& c : clusters) {
    if (c.size() >= static_cast<std::size_t>(min_size)) kept.push_back(std::move(c));
  }
  return kept;
}

/// Runs the whole SER pipeline over the store: flatten scans, downsample,
/// partition by coverage, cluster the uncovered remainder, and wrap each
/// surviving cluster with its centroid frontier.
///
/// Scans are flattened newest-keyframe-first, so the voxel representative in
/// any cell seen by the current scan carries the current keyframe's tag. A
/// region's tags therefore name the most recent keyframes to observe it,
/// which is what both the contribution anchors and the line-of-sight test
/// downstream want to know.
inline SerSet generate_sers(const MapStore& store, const SerConfig& config) {
  if (store.empty()) throw std::logic_error("generate_sers: empty map store");

  std::vector<TaggedPoint> flat;
  std::size_t total = 0;
  for (const auto& s : store.scans()) total += s.points.size();
  flat.reserve(total);
  for (auto it = store.scans().rbegin(); it != store.scans().rend(); ++it) {
    for (const auto& p : it->points) flat.push_back(TaggedPoint{p, it->keyframe_id});
  }

  const std::vector<TaggedPoint> down = voxel_downsample(flat, config.v_down);
  CoveragePartition part =
      partition_coverage(down, store.keyframes(), config.zeta_coverage);
  const auto clusters = cluster_uncovered(part.uncovered, config.cluster_tol,
                                          config.min_cluster_size);

  SerSet out;
  out.source_step = store.latest().step;
  out.sers.reserve(clusters.size());
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    SER ser;
    ser.id = static_cast<int>(j);
    ser.points = clusters[j];
    std::vector<Point3> raw;
    raw.reserve(ser.points.size());
    for (const auto& tp : ser.points) raw.push_back(tp.point);
    ser.frontier = centroid(raw);
    ser.volume = ser.points.size();
    out.sers.push_back(std::move(ser));
  }
  return out;
}

}  // namespace serex
