#pragma once

#include "serex/core/types.hpp"
#include "serex/graph/keyframe_graph.hpp"

#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace serex {

/// A walk through the keyframe graph: consecutive node_ids are edges, length
/// is the sum of their weights.
struct Path {
  std::vector<KeyframeId> node_ids;
  double length = 0.0;
};

/// Dijkstra over the keyframe graph. Among equal-length shortest paths the
/// lexicographically smallest node-id sequence wins, which the priority queue
/// enforces directly by ordering entries as (distance, id-sequence) pairs.
/// Returns nothing when dst is unreachable from src.
inline std::optional<Path> shortest_path(const KeyframeGraph& g, KeyframeId src,
                                         KeyframeId dst,
                                         const MapStore& store) {
  if (!g.has_node(src)) throw std::invalid_argument("shortest_path: unknown src");
  if (!g.has_node(dst)) throw std::invalid_argument("shortest_path: unknown dst");
  if (src >= store.size() || dst >= store.size()) {
    throw std::invalid_argument("shortest_path: id not in map store");
  }

  using Entry = std::pair<double, std::vector<KeyframeId>>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
  std::set<KeyframeId> settled;

  pq.push({0.0, {src}});
  while (!pq.empty()) {
    Entry top = pq.top();
    pq.pop();
    const KeyframeId u = top.second.back();
    if (settled.count(u)) continue;
    settled.insert(u);
    if (u == dst) return Path{std::move(top.second), top.first};

    for (const auto& [v, w] : g.neighbors(u)) {
      if (settled.count(v)) continue;
      std::vector<KeyframeId> next = top.second;
      next.push_back(v);
      pq.push({top.first + w, std::move(next)});
    }
  }
  return std::nullopt;
}

}  // namespace serex
