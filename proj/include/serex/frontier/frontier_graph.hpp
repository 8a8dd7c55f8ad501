#pragma once

#include "serex/core/types.hpp"
#include "serex/core/voxel.hpp"
#include "serex/ser/ser.hpp"

#include <cstddef>
#include <map>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace serex {

/// How many of a SER's points each keyframe generated. Because downsampling
/// preserved the tag of every retained representative, this is a plain count
/// over the SER's TaggedPoints.
struct ContributionHistogram {
  std::map<KeyframeId, std::size_t> counts;

  bool empty() const { return counts.empty(); }
};

inline ContributionHistogram contribution_histogram(const SER& ser) {
  ContributionHistogram hist;
  for (const auto& tp : ser.points) ++hist.counts[tp.keyframe_id];
  return hist;
}

/// Alternative vote: count raw scan points falling inside the SER's occupied
/// voxels instead of one vote per retained representative. Exists for
/// sensitivity analysis; the episode loop uses the representative count
/// unless configured otherwise.
inline ContributionHistogram contribution_histogram_raw(const SER& ser,
                                                        const MapStore& store,
                                                        double v_down) {
  std::unordered_set<VoxelKey, VoxelKeyHash> cells;
  cells.reserve(ser.points.size());
  for (const auto& tp : ser.points) {
    cells.insert(voxel_key_of(tp.point, v_down));
  }

  ContributionHistogram hist;
  for (const auto& scan : store.scans()) {
    std::size_t n = 0;
    for (const auto& p : scan.points) {
      if (cells.count(voxel_key_of(p, v_down))) ++n;
    }
    if (n > 0) hist.counts[scan.keyframe_id] += n;
  }
  return hist;
}

/// Keyframe with the maximum count; ties go to the larger (most recent) id,
/// whose line of sight to the region is freshest.
inline KeyframeId highest_contribution(const ContributionHistogram& hist) {
  if (hist.empty()) {
    throw std::invalid_argument("highest_contribution: empty histogram");
  }
  KeyframeId best = 0;
  std::size_t best_count = 0;
  for (const auto& [id, count] : hist.counts) {  // ascending id order
    if (count >= best_count) {
      best = id;
      best_count = count;
    }
  }
  return best;
}

/// One edge of the frontier graph: a frontier position anchored at the
/// keyframe that contributed most of its SER. The frontier is stored as a
/// position, not a node id, because frontiers are regenerated wholesale on
/// every keyframe while keyframes are permanent.
struct FrontierEntry {
  int ser_id = 0;
  Point3 frontier{Point3::Zero()};
  KeyframeId anchor_keyframe_id = 0;
};

struct FrontierGraph {
  std::vector<FrontierEntry> entries;

  const FrontierEntry* find(int ser_id) const {
    for (const auto& e : entries) {
      if (e.ser_id == ser_id) return &e;
    }
    return nullptr;
  }
};

/// One entry per SER. No collision checking here: an anchor, by construction,
/// generated most of the region's points, so a straight shot from it is
/// assumed viable and any residual error is absorbed by local planning.
inline FrontierGraph build_frontier_graph(const SerSet& sers) {
  FrontierGraph gf;
  gf.entries.reserve(sers.sers.size());
  for (const auto& ser : sers.sers) {
    gf.entries.push_back(FrontierEntry{
        ser.id, ser.frontier, highest_contribution(contribution_histogram(ser))});
  }
  return gf;
}

/// As above but with the raw-point vote.
inline FrontierGraph build_frontier_graph_raw(const SerSet& sers,
                                              const MapStore& store,
                                              double v_down) {
  FrontierGraph gf;
  gf.entries.reserve(sers.sers.size());
  for (const auto& ser : sers.sers) {
    gf.entries.push_back(FrontierEntry{
        ser.id, ser.frontier,
        highest_contribution(contribution_histogram_raw(ser, store, v_down))});
  }
  return gf;
}

}  // namespace serex
