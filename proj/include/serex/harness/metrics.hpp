#pragma once

#include "serex/core/types.hpp"
#include "serex/frontier/frontier_graph.hpp"
#include "serex/graph/keyframe_graph.hpp"

#include <string>
#include <vector>

namespace serex {

/// One CSV row, written at every keyframe event.
struct MetricsRow {
  int step = 0;
  double time_s = 0.0;
  double explored_volume_m3 = 0.0;
  double volume_increment_m3_s = 0.0;
  double distance_traveled_m = 0.0;
  int n_sers = 0;
  std::string decision;           // LOCAL | GLOBAL | DONE
  int selected_ser_id = -1;       // -1 when no frontier was selected
  int anchor_keyframe_id = -1;    // -1 except on GLOBAL rows
};

/// One log-sidecar record per keyframe event: a full snapshot of both graphs
/// plus the decision, so post-hoc assertions can replay the episode's
/// topology without rerunning it.
struct SidecarRecord {
  int step = 0;
  KeyframeId keyframe_id = 0;
  std::vector<KeyframeGraph::Edge> graph_edges;
  std::vector<FrontierEntry> frontier_entries;
  std::string decision;
  int selected_ser_id = -1;
  int anchor_keyframe_id = -1;
  std::vector<KeyframeId> path_nodes;  // planned route on GLOBAL rows
};

struct EpisodeMetrics {
  std::vector<MetricsRow> rows;
  std::vector<SidecarRecord> sidecar;

  double reachable_volume_m3 = 0.0;
  double final_coverage_fraction = 0.0;
  double total_path_length = 0.0;
  int global_plan_count = 0;
  int stall_count = 0;
  bool done = false;        // planner reported completion
  bool exhausted = false;   // completion forced by unreachable anchors
  bool failed = false;      // episode aborted on collision
  std::string failure_reason;
};

}  // namespace serex
