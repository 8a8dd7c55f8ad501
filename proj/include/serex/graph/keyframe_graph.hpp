#pragma once

#include "serex/core/geometry.hpp"
#include "serex/core/knn.hpp"
#include "serex/core/types.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace serex {

struct GraphConfig {
  int k = 10;           // KNN neighbors considered for new edges
  double r_safe = 0.6;  // clearance radius for edge collision checks
};

/// Point cloud assembled from the scans of a few nearby keyframes, used as
/// the obstacle set for segment collision checks.
struct Submap {
  std::vector<Point3> points;
  std::vector<KeyframeId> source_keyframe_ids;
};

/// Traversability graph over keyframe positions. Undirected, weights are the
/// Euclidean distance between endpoints. Grows monotonically: nodes and edges
/// are never removed (the world is static).
class KeyframeGraph {
 public:
  struct Edge {
    KeyframeId a = 0, b = 0;  // a < b
    double weight = 0.0;
  };

  void add_node(KeyframeId id, const Point3& position) {
    nodes_.emplace(id, position);
    adj_.try_emplace(id);
  }

  bool has_node(KeyframeId id) const { return nodes_.count(id) > 0; }

  bool has_edge(KeyframeId a, KeyframeId b) const {
    const auto it = adj_.find(a);
    if (it == adj_.end()) return false;
    for (const auto& [n, w] : it->second) {
      if (n == b) return true;
    }
    return false;
  }

  /// No self-edges; adding an existing edge is a no-op.
  void add_edge(KeyframeId a, KeyframeId b, double weight) {
    if (a == b) throw std::invalid_argument("self-edge");
    if (!has_node(a) || !has_node(b)) throw std::invalid_argument("unknown node");
    if (has_edge(a, b)) return;
    insert_sorted(adj_[a], b, weight);
    insert_sorted(adj_[b], a, weight);
  }

  std::size_t node_count() const { return nodes_.size(); }
  const std::map<KeyframeId, Point3>& nodes() const { return nodes_; }

  const Point3& position(KeyframeId id) const {
    const auto it = nodes_.find(id);
    if (it == nodes_.end()) throw std::invalid_argument("unknown node");
    return it->second;
  }

  /// Neighbors of `id` as (neighbor, weight), ascending by neighbor id.
  const std::vector<std::pair<KeyframeId, double>>& neighbors(KeyframeId id) const {
    const auto it = adj_.find(id);
    if (it == adj_.end()) throw std::invalid_argument("unknown node");
    return it->second;
  }

  /// All edges with a < b, sorted by (a, b). Stable across runs, so this is
  /// what the harness serializes.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (const auto& [id, nbrs] : adj_) {
      for (const auto& [n, w] : nbrs) {
        if (id < n) out.push_back(Edge{id, n, w});
      }
    }
    return out;
  }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (const auto& [id, nbrs] : adj_) twice += nbrs.size();
    return twice / 2;
  }

 private:
  static void insert_sorted(std::vector<std::pair<KeyframeId, double>>& nbrs,
                            KeyframeId id, double weight) {
    const auto pos = std::lower_bound(
        nbrs.begin(), nbrs.end(), id,
        [](const auto& entry, KeyframeId v) { return entry.first < v; });
    nbrs.insert(pos, {id, weight});
  }

  std::map<KeyframeId, Point3> nodes_;
  std::map<KeyframeId, std::vector<std::pair<KeyframeId, double>>> adj_;
};

/// Scans of the k keyframes nearest to `around`, concatenated in ascending
/// keyframe-id order.
inline Submap build_submap(const MapStore& store, const Point3& around,
                           std::size_t k) {
  if (store.empty()) throw std::logic_error("build_submap: empty map store");

  Submap sm;
  sm.source_keyframe_ids = knn_keyframes(store, around, k);
  std::sort(sm.source_keyframe_ids.begin(), sm.source_keyframe_ids.end());

  std::size_t total = 0;
  for (const KeyframeId id : sm.source_keyframe_ids) {
    total += store.scan(id).points.size();
  }
  sm.points.reserve(total);
  for (const KeyframeId id : sm.source_keyframe_ids) {
    const auto& pts = store.scan(id).points;
    sm.points.insert(sm.points.end(), pts.begin(), pts.end());
  }
  return sm;
}

/// True iff every submap point keeps a clearance strictly greater than r_safe
/// from the segment [a, b].
inline bool collision_free(const Point3& a, const Point3& b,
                           const Submap& submap, double r_safe) {
  for (const auto& p : submap.points) {
    if (point_segment_distance(p, a, b) <= r_safe) return false;
  }
  return true;
}

/// Inserts the new keyframe as a node and tries edges to its k nearest
/// existing nodes, plus always to the immediately preceding keyframe. Each
/// candidate edge is collision-checked against a submap built around the
/// segment midpoint. Existing edges are left untouched.
inline void update_graph(KeyframeGraph& g, const MapStore& store,
                         const Keyframe& new_kf, const GraphConfig& config) {
  g.add_node(new_kf.id, new_kf.position);
  if (g.node_count() == 1) return;

  std::vector<KeyframeId> candidates;
  for (const KeyframeId id :
       knn_keyframes(store, new_kf.position,
                     static_cast<std::size_t>(config.k) + 1)) {
    if (id != new_kf.id && g.has_node(id)) candidates.push_back(id);
  }
  if (candidates.size() > static_cast<std::size_t>(config.k)) {
    candidates.resize(static_cast<std::size_t>(config.k));
  }
  if (new_kf.id > 0) {
    const KeyframeId prev = new_kf.id - 1;
    if (g.has_node(prev) &&
        std::find(candidates.begin(), candidates.end(), prev) == candidates.end()) {
      candidates.push_back(prev);
    }
  }

  for (const KeyframeId other : candidates) {
    if (g.has_edge(new_kf.id, other)) continue;
    const Point3& b = g.position(other);
    const Point3 mid = 0.5 * (new_kf.position + b);
    const Submap sm =
        build_submap(store, mid, static_cast<std::size_t>(config.k));
    if (collision_free(new_kf.position, b, sm, config.r_safe)) {
      g.add_edge(new_kf.id, other, (new_kf.position - b).norm());
    }
  }
}

}  // namespace serex
