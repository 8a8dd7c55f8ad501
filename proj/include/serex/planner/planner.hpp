#pragma once

#include "serex/core/geometry.hpp"
#include "serex/core/types.hpp"
#include "serex/frontier/frontier_graph.hpp"
#include "serex/graph/keyframe_graph.hpp"
#include "serex/graph/shortest_path.hpp"
#include "serex/ser/ser.hpp"
#include "serex/sim/robot.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace serex {

struct PlannerConfig {
  double w_vol = 1.0;
  double w_dir = 1.0;
  double w_dis = 1.0;
  double reach_radius = 3.5;  // frontier counts as reached inside this ball
  double eps_dist = 0.1;      // floor on the distance factor
};

/// Score of a candidate frontier:
///
///   score = (w_vol * Volume) / (w_dir * Direction * w_dis * Distance)
///
/// Volume is the SER's point count. Distance is measured from the current
/// keyframe position to the frontier, floored at eps_dist. Direction is
/// 1 + |dpsi| / pi in [1, 2], where dpsi is the horizontal bearing from the
/// robot to the frontier minus the robot's yaw, wrapped into (-pi, pi] —
/// frontiers straight ahead score up to twice as high as frontiers behind.
inline double exploration_score(const SER& ser, const RobotState& robot,
                                const Point3& current_kf_position,
                                const PlannerConfig& cfg) {
  const double volume = static_cast<double>(ser.volume);
  const double distance =
      std::max((current_kf_position - ser.frontier).norm(), cfg.eps_dist);
  const double bearing =
      horizontal_bearing(robot.pose.position, ser.frontier, robot.pose.yaw);
  const double dpsi = std::abs(wrap_angle(bearing - robot.pose.yaw));
  const double direction = 1.0 + dpsi / M_PI;
  return (cfg.w_vol * volume) / (cfg.w_dir * direction * cfg.w_dis * distance);
}

struct SelectedFrontier {
  int ser_id = 0;
  Point3 frontier{Point3::Zero()};
  double score = 0.0;
};

/// Argmax of exploration_score; ties break toward the smaller ser id.
inline std::optional<SelectedFrontier> select_best_frontier(
    const SerSet& sers, const RobotState& robot,
    const Point3& current_kf_position, const PlannerConfig& cfg) {
  std::optional<SelectedFrontier> best;
  for (const auto& ser : sers.sers) {
    const double s = exploration_score(ser, robot, current_kf_position, cfg);
    if (!best || s > best->score) {
      best = SelectedFrontier{ser.id, ser.frontier, s};
    }
  }
  return best;
}

/// Line-of-sight proxy: the SER is treated as visible from the current
/// keyframe iff any of its points came from that keyframe's scan. True means
/// plan locally straight at the frontier; false means the region was only
/// ever seen from older keyframes, so route through the graph instead.
inline bool los_decision(const SER& ser, const Scan& current_scan) {
  for (const auto& tp : ser.points) {
    if (tp.keyframe_id == current_scan.keyframe_id) return true;
  }
  return false;
}

struct PlanDecision {
  enum class Kind { Local, Global, Done };

  Kind kind = Kind::Done;
  int ser_id = -1;                 // selected SER (Local/Global)
  Point3 target{Point3::Zero()};   // the selected frontier (Local/Global)
  KeyframeId anchor_id = 0;        // anchor keyframe (Global)
  std::optional<Path> path;        // graph route to anchor (Global)
  bool exhausted = false;          // Done because every anchor was unreachable
};

/// Full per-keyframe decision. Candidates are visited in descending score
/// order: a visible frontier is planned locally; an invisible one is routed
/// to its anchor via Dijkstra. Frontiers whose anchors are unreachable fall
/// through to the next candidate; if every candidate falls through, the
/// decision is Done with the exhausted flag raised.
inline PlanDecision plan(const SerSet& sers, const KeyframeGraph& g,
                         const FrontierGraph& gf, const MapStore& store,
                         const RobotState& robot, const PlannerConfig& cfg,
                         const GraphConfig& /*graph_cfg*/) {
  if (store.empty()) throw std::logic_error("plan: empty map store");
  if (sers.empty()) return PlanDecision{};

  const Keyframe& current = store.latest();

  std::vector<const SER*> by_score;
  by_score.reserve(sers.sers.size());
  for (const auto& ser : sers.sers) by_score.push_back(&ser);
  std::sort(by_score.begin(), by_score.end(),
            [&](const SER* a, const SER* b) {
              const double sa = exploration_score(*a, robot, current.position, cfg);
              const double sb = exploration_score(*b, robot, current.position, cfg);
              if (sa != sb) return sa > sb;
              return a->id < b->id;
            });

  for (const SER* ser : by_score) {
    if (los_decision(*ser, store.scan(current.id))) {
      PlanDecision d;
      d.kind = PlanDecision::Kind::Local;
      d.ser_id = ser->id;
      d.target = ser->frontier;
      return d;
    }
    const FrontierEntry* entry = gf.find(ser->id);
    if (entry == nullptr) {
      throw std::logic_error("plan: frontier graph missing entry for SER");
    }
    auto path = shortest_path(g, current.id, entry->anchor_keyframe_id, store);
    if (path) {
      PlanDecision d;
      d.kind = PlanDecision::Kind::Global;
      d.ser_id = ser->id;
      d.target = ser->frontier;
      d.anchor_id = entry->anchor_keyframe_id;
      d.path = std::move(path);
      return d;
    }
  }

  PlanDecision d;
  d.exhausted = true;
  return d;
}

/// Clearance test for one candidate move. A map point already inside the
/// safety margin at the segment start gets a weaker veto: a backfacing wall
/// is invisible until the robot has walked right up to it, and once it is
/// scanned every segment from the robot violates r_safe, so the strict test
/// would pin the robot forever. A pre-violated point therefore only vetoes
/// moves that bring the segment still closer to it — retreat stays legal,
/// while cutting through the wall it sits on does not.
inline bool clears_new_obstacles(const Point3& a, const Point3& b,
                                 const Submap& submap, double r_safe) {
  for (const auto& p : submap.points) {
    const double at_start = (p - a).norm();
    const double along = point_segment_distance(p, a, b);
    if (at_start <= r_safe) {
      if (along < at_start - 1e-12) return false;
    } else if (along <= r_safe) {
      return false;
    }
  }
  return true;
}

/// Straight-line local planner with fixed detours. If the direct segment to
/// the target is clear it is the plan; otherwise 48 candidate steps (16
/// compass azimuths at 22.5-degree spacing, each level and pitched +-30
/// degrees) of length 2 * r_safe are tried and the clear one ending nearest
/// the target wins. With no clear candidate the robot's own position is
/// returned — a stall the episode loop escalates after it repeats.
inline Point3 local_plan(const RobotState& robot, const Point3& target,
                         const Submap& env_map_points,
                         const GraphConfig& graph_cfg) {
  if (clears_new_obstacles(robot.pose.position, target, env_map_points,
                           graph_cfg.r_safe)) {
    return target;
  }

  const double step = 2.0 * graph_cfg.r_safe;
  constexpr double kPitch = 30.0 * M_PI / 180.0;
  const double pitches[3] = {0.0, kPitch, -kPitch};

  std::optional<Point3> best;
  double best_dist = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double az = 2.0 * M_PI * i / 16.0;
    for (const double pitch : pitches) {
      const Point3 dir{std::cos(pitch) * std::cos(az),
                       std::cos(pitch) * std::sin(az), std::sin(pitch)};
      const Point3 wp = robot.pose.position + step * dir;
      if (!clears_new_obstacles(robot.pose.position, wp, env_map_points,
                                graph_cfg.r_safe)) {
        continue;
      }
      const double dist = (wp - target).norm();
      if (!best || dist < best_dist) {
        best = wp;
        best_dist = dist;
      }
    }
  }
  return best ? *best : robot.pose.position;
}

}  // namespace serex
