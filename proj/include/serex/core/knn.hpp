#pragma once

#include "serex/core/types.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace serex {

/// Ids of the min(k, store size) keyframes nearest to `query`, ascending by
/// distance, ties broken by smaller id. Linear scan plus sort; stores stay
/// small enough at this scale that rebuilding per query beats maintaining an
/// index.
inline std::vector<KeyframeId> knn_keyframes(const MapStore& store,
                                             const Point3& query,
                                             std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");

  std::vector<std::pair<double, KeyframeId>> by_dist;
  by_dist.reserve(store.size());
  for (const auto& kf : store.keyframes()) {
    by_dist.emplace_back((kf.position - query).norm(), kf.id);
  }
  std::sort(by_dist.begin(), by_dist.end());

  const std::size_t n = std::min(k, by_dist.size());
  std::vector<KeyframeId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(by_dist[i].second);
  return out;
}

}  // namespace serex
