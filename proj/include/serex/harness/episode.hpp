#pragma once

#include "serex/core/types.hpp"
#include "serex/core/voxel.hpp"
#include "serex/frontier/frontier_graph.hpp"
#include "serex/graph/keyframe_graph.hpp"
#include "serex/graph/shortest_path.hpp"
#include "serex/harness/metrics.hpp"
#include "serex/harness/scenario.hpp"
#include "serex/planner/planner.hpp"
#include "serex/ser/ser.hpp"
#include "serex/sim/environment.hpp"
#include "serex/sim/robot.hpp"
#include "serex/sim/sensor.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

namespace serex {

/// Ground-truth explored volume: reachable free voxels whose centers lie
/// within zeta of any keyframe, times the voxel volume.
inline double explored_volume(const Environment& env,
                              const std::vector<Keyframe>& keyframes,
                              double zeta) {
  if (keyframes.empty()) return 0.0;
  const double z2 = zeta * zeta;
  std::size_t n = 0;
  for (const auto& key : env.free_reachable()) {
    const Point3 c = env.center_of(key);
    for (const auto& kf : keyframes) {
      if ((kf.position - c).squaredNorm() <= z2) {
        ++n;
        break;
      }
    }
  }
  const double vs = env.voxel_size();
  return static_cast<double>(n) * vs * vs * vs;
}

/// Incremental version of explored_volume: each new keyframe only scans the
/// voxel bounding box of its own zeta-ball.
class ExploredVolumeTracker {
 public:
  ExploredVolumeTracker(const Environment& env, double zeta)
      : env_(&env), zeta_(zeta) {}

  void add_keyframe(const Point3& pos) {
    const double vs = env_->voxel_size();
    const double z2 = zeta_ * zeta_;
    const VoxelKey lo = voxel_key_of(pos - Point3::Constant(zeta_), vs);
    const VoxelKey hi = voxel_key_of(pos + Point3::Constant(zeta_), vs);
    for (std::int64_t z = lo.z; z <= hi.z; ++z) {
      for (std::int64_t y = lo.y; y <= hi.y; ++y) {
        for (std::int64_t x = lo.x; x <= hi.x; ++x) {
          const VoxelKey key{x, y, z};
          if (explored_.count(key)) continue;
          if ((env_->center_of(key) - pos).squaredNorm() > z2) continue;
          if (!env_->free_reachable().count(key)) continue;
          explored_.insert(key);
        }
      }
    }
  }

  std::size_t count() const { return explored_.size(); }
  double volume() const {
    const double vs = env_->voxel_size();
    return static_cast<double>(explored_.size()) * vs * vs * vs;
  }

 private:
  const Environment* env_;
  double zeta_;
  std::unordered_set<VoxelKey, VoxelKeyHash> explored_;
};

/// Optional instrumentation called once per keyframe event, after the maps
/// and the decision for that event are final. Used by tests to assert
/// per-keyframe invariants without rerunning the pipeline.
struct EpisodeHooks {
  std::function<void(const MapStore&, const SerSet&, const PlanDecision&,
                     const KeyframeGraph&, const FrontierGraph&)>
      on_keyframe;
};

namespace detail {

inline std::unordered_set<VoxelKey, VoxelKeyHash> ser_voxel_keys(
    const SER& ser, double v_down) {
  std::unordered_set<VoxelKey, VoxelKeyHash> keys;
  keys.reserve(ser.points.size());
  for (const auto& tp : ser.points) keys.insert(voxel_key_of(tp.point, v_down));
  return keys;
}

/// Best-overlap match of an old SER footprint against a fresh SerSet: the
/// SER sharing the most v_down voxels wins, ties to the smaller id, null if
/// nothing overlaps (the region was covered or re-clustered away).
inline const SER* associate_ser(
    const SerSet& sers, const std::unordered_set<VoxelKey, VoxelKeyHash>& keys,
    double v_down) {
  const SER* best = nullptr;
  std::size_t best_overlap = 0;
  for (const auto& ser : sers.sers) {  // ascending id order
    std::size_t overlap = 0;
    for (const auto& tp : ser.points) {
      if (keys.count(voxel_key_of(tp.point, v_down))) ++overlap;
    }
    if (overlap > best_overlap) {
      best = &ser;
      best_overlap = overlap;
    }
  }
  return best;
}

inline const SER* find_ser(const SerSet& sers, int id) {
  for (const auto& ser : sers.sers) {
    if (ser.id == id) return &ser;
  }
  return nullptr;
}

/// Single-episode state machine. One instance per run; all mutable episode
/// state lives here so the public entry points stay pure.
class EpisodeRunner {
 public:
  EpisodeRunner(const ScenarioConfig& cfg, const Environment& env,
                const EpisodeHooks& hooks, bool greedy)
      : cfg_(cfg),
        env_(env),
        hooks_(hooks),
        greedy_(greedy),
        tracker_(env, cfg.ser.zeta_coverage),
        rng_(cfg.seed) {}

  EpisodeMetrics run() {
    if (env_.free_reachable().empty()) {
      throw std::logic_error("run_episode: environment reachability not computed");
    }
    const double vs = env_.voxel_size();
    metrics_.reachable_volume_m3 =
        static_cast<double>(env_.free_reachable().size()) * vs * vs * vs;

    robot_.pose = cfg_.start;
    try {
      keyframe_event();  // bootstrap scan at the start pose
      while (!terminated_ && robot_.step < cfg_.step_budget) {
        step_once();
      }
    } catch (const CollisionError& e) {
      metrics_.failed = true;
      metrics_.failure_reason = e.what();
    }

    metrics_.final_coverage_fraction =
        static_cast<double>(tracker_.count()) /
        static_cast<double>(env_.free_reachable().size());
    metrics_.total_path_length = robot_.distance_traveled;
    return std::move(metrics_);
  }

 private:
  enum class Mode { Local, GlobalFollow };

  struct ActiveTarget {
    int ser_id = -1;
    Point3 frontier{Point3::Zero()};
    std::unordered_set<VoxelKey, VoxelKeyHash> keys;
  };

  struct DroppedSer {
    std::unordered_set<VoxelKey, VoxelKeyHash> keys;
    int current_id = -1;
  };

  double node_reach() const { return 0.5 * cfg_.d_key; }
  double min_rescan() const { return env_.voxel_size(); }

  // ---- per-step control ----------------------------------------------------

  void step_once() {
    if (pending_rescan_) {
      pending_rescan_ = false;
      keyframe_event();
      return;
    }
    if (!have_target_) {
      // Nothing to chase mid-interval; hold and rescan next step.
      pending_rescan_ = true;
      robot_ = step_robot(robot_, robot_.pose.position, cfg_.dt, cfg_.v_max, env_);
      return;
    }

    const Point3 subgoal = current_subgoal();
    const Point3 wp = local_plan(robot_, subgoal, submap_, cfg_.graph);
    const bool stalled =
        (wp - robot_.pose.position).norm() == 0.0 &&
        (subgoal - robot_.pose.position).norm() > 0.0;
    if (stalled) {
      ++metrics_.stall_count;
      ++consecutive_stalls_;
      if (consecutive_stalls_ >= 3) {
        escalate_stall();
        consecutive_stalls_ = 0;
      }
    } else {
      consecutive_stalls_ = 0;
    }

    robot_ = step_robot(robot_, wp, cfg_.dt, cfg_.v_max, env_);
    after_motion();
  }

  Point3 current_subgoal() const {
    if (mode_ == Mode::GlobalFollow) {
      return graph_.position(path_nodes_[path_index_]);
    }
    return target_.frontier;
  }

  void after_motion() {
    if (mode_ == Mode::GlobalFollow) {
      const Point3 node = graph_.position(path_nodes_[path_index_]);
      if ((robot_.pose.position - node).norm() <= node_reach()) {
        ++path_index_;
        if (path_index_ >= path_nodes_.size()) mode_ = Mode::Local;
      }
    }

    bool arrived = false;
    if (have_target_ && mode_ == Mode::Local &&
        (robot_.pose.position - target_.frontier).norm() <=
            cfg_.planner.reach_radius) {
      arrived = true;
    }

    const bool distance_trigger = maybe_generate_keyframe(
        robot_, last_kf_position_, KeyframePolicy{cfg_.d_key});
    bool force = false;
    if (arrived) {
      need_new_target_ = true;
      if (!distance_trigger && last_kf_position_ &&
          (robot_.pose.position - *last_kf_position_).norm() >= min_rescan()) {
        force = true;  // arrived: worth a scan even below the d_key trigger
      }
    }

    if (distance_trigger || force) {
      keyframe_event();
    } else if (arrived) {
      // Too close to the last scan pose to justify another; re-select from
      // the current SerSet, skipping the frontier just resolved.
      resolved_ser_ids_.insert(target_.ser_id);
      select_from_current();
    }
  }

  // ---- keyframe events -----------------------------------------------------

  void keyframe_event() {
    Scan scan = raycast_scan(env_, robot_.pose, cfg_.sensor,
                             cfg_.sensor.noise_sigma > 0.0 ? &rng_ : nullptr);
    const KeyframeId id = store_.add_keyframe(robot_.pose.position, robot_.step,
                                              std::move(scan.points));
    last_kf_position_ = robot_.pose.position;

    update_graph(graph_, store_, store_.keyframe(id), cfg_.graph);
    sers_ = generate_sers(store_, cfg_.ser);
    gf_ = cfg_.contribution_on_raw_points
              ? build_frontier_graph_raw(sers_, store_, cfg_.ser.v_down)
              : build_frontier_graph(sers_);
    tracker_.add_keyframe(robot_.pose.position);
    submap_ = build_submap(store_, robot_.pose.position,
                           static_cast<std::size_t>(cfg_.graph.k));
    resolved_ser_ids_.clear();
    reassociate_dropped();

    const PlanDecision decision = decide();
    record(decision, id);

    if (decision.kind == PlanDecision::Kind::Done) {
      terminated_ = true;
      metrics_.done = true;
      metrics_.exhausted = decision.exhausted;
    }
  }

  void reassociate_dropped() {
    std::vector<DroppedSer> kept;
    std::unordered_set<int> seen;
    for (auto& d : dropped_) {
      const SER* assoc = associate_ser(sers_, d.keys, cfg_.ser.v_down);
      if (assoc == nullptr || seen.count(assoc->id)) continue;
      seen.insert(assoc->id);
      kept.push_back(DroppedSer{ser_voxel_keys(*assoc, cfg_.ser.v_down), assoc->id});
    }
    dropped_ = std::move(kept);
  }

  PlanDecision decide() {
    if (sers_.empty()) {
      have_target_ = false;
      need_new_target_ = false;
      return PlanDecision{};  // Done
    }
    if (greedy_) return decide_greedy();

    if (have_target_ && !need_new_target_) {
      const SER* assoc = associate_ser(sers_, target_.keys, cfg_.ser.v_down);
      if (assoc == nullptr) {
        need_new_target_ = true;  // vanished: covered or re-clustered away
      } else {
        target_.ser_id = assoc->id;
        target_.frontier = assoc->frontier;
        target_.keys = ser_voxel_keys(*assoc, cfg_.ser.v_down);
        if ((robot_.pose.position - target_.frontier).norm() <=
            cfg_.planner.reach_radius) {
          need_new_target_ = true;  // already inside the reach ball
        }
      }
    }

    if (!have_target_ || need_new_target_) {
      return select_new_target();
    }

    // The target persists; the LOS/graph branch is re-decided every keyframe
    // so each metrics row reflects the topology at that moment.
    const SER* ser = find_ser(sers_, target_.ser_id);
    PlanDecision d;
    d.ser_id = target_.ser_id;
    d.target = target_.frontier;
    if (los_decision(*ser, store_.scan(store_.latest().id))) {
      d.kind = PlanDecision::Kind::Local;
      mode_ = Mode::Local;
    } else {
      const FrontierEntry* entry = gf_.find(ser->id);
      if (entry == nullptr) {
        throw std::logic_error("episode: frontier graph missing active SER");
      }
      auto path =
          shortest_path(graph_, store_.latest().id, entry->anchor_keyframe_id,
                        store_);
      if (!path) {
        drop_active_target();
        return select_new_target();
      }
      d.kind = PlanDecision::Kind::Global;
      d.anchor_id = entry->anchor_keyframe_id;
      d.path = *path;
      enter_global(path->node_ids);
    }
    return d;
  }

  PlanDecision decide_greedy() {
    if (have_target_ && !need_new_target_) {
      const SER* assoc = associate_ser(sers_, target_.keys, cfg_.ser.v_down);
      if (assoc == nullptr) {
        need_new_target_ = true;
      } else {
        target_.ser_id = assoc->id;
        target_.frontier = assoc->frontier;
        target_.keys = ser_voxel_keys(*assoc, cfg_.ser.v_down);
        if ((robot_.pose.position - target_.frontier).norm() <=
            cfg_.planner.reach_radius) {
          need_new_target_ = true;
        }
      }
    }
    if (!have_target_ || need_new_target_) {
      if (!greedy_pick()) {
        // Every frontier excluded; start over without exclusions.
        dropped_.clear();
        resolved_ser_ids_.clear();
        if (!greedy_pick()) {
          // Even unexcluded, every frontier is already underfoot; standing
          // on them scans nothing new, so the baseline is out of moves.
          have_target_ = false;
          need_new_target_ = false;
          PlanDecision done;
          done.exhausted = true;
          return done;
        }
      }
    }
    PlanDecision d;
    d.kind = PlanDecision::Kind::Local;
    d.ser_id = target_.ser_id;
    d.target = target_.frontier;
    mode_ = Mode::Local;
    return d;
  }

  /// Nearest-frontier-by-straight-line selection (the baseline's whole
  /// policy). Returns false if every SER is currently excluded.
  bool greedy_pick() {
    const SER* best = nullptr;
    double best_dist = 0.0;
    for (const auto& ser : sers_.sers) {
      if (excluded(ser.id)) continue;
      const double dist = (robot_.pose.position - ser.frontier).norm();
      if (dist <= cfg_.planner.reach_radius) continue;  // already underfoot
      if (!best || dist < best_dist) {
        best = &ser;
        best_dist = dist;
      }
    }
    if (best == nullptr) return false;
    adopt_target(*best);
    mode_ = Mode::Local;
    return true;
  }

  PlanDecision select_new_target() {
    // Exclusions are dropped at most once per selection, and a frontier the
    // robot is already standing inside is re-excluded rather than adopted:
    // chasing it cannot move the robot, so re-adopting it forever would spin
    // the episode in place. Both bounds together guarantee this loop ends.
    bool cleared = false;
    while (true) {
      const SerSet candidates = filtered_sers();
      if (candidates.sers.empty()) {
        if (cleared) {
          have_target_ = false;
          need_new_target_ = false;
          PlanDecision done;
          done.exhausted = true;
          return done;
        }
        dropped_.clear();
        resolved_ser_ids_.clear();
        cleared = true;
        continue;
      }
      PlanDecision d =
          plan(candidates, graph_, gf_, store_, robot_, cfg_.planner, cfg_.graph);
      if (d.kind == PlanDecision::Kind::Done) {
        have_target_ = false;
        need_new_target_ = false;
        return d;
      }
      if ((robot_.pose.position - d.target).norm() <= cfg_.planner.reach_radius) {
        resolved_ser_ids_.insert(d.ser_id);
        continue;
      }
      adopt_target(*find_ser(sers_, d.ser_id));
      if (d.kind == PlanDecision::Kind::Local) {
        mode_ = Mode::Local;
      } else {
        enter_global(d.path->node_ids);
      }
      return d;
    }
  }

  void adopt_target(const SER& ser) {
    target_.ser_id = ser.id;
    target_.frontier = ser.frontier;
    target_.keys = ser_voxel_keys(ser, cfg_.ser.v_down);
    have_target_ = true;
    need_new_target_ = false;
  }

  void enter_global(const std::vector<KeyframeId>& nodes) {
    mode_ = Mode::GlobalFollow;
    path_nodes_ = nodes;
    path_index_ = 0;
    while (path_index_ < path_nodes_.size() &&
           (robot_.pose.position - graph_.position(path_nodes_[path_index_]))
                   .norm() <= node_reach()) {
      ++path_index_;
    }
    if (path_index_ >= path_nodes_.size()) mode_ = Mode::Local;
  }

  bool excluded(int ser_id) const {
    if (resolved_ser_ids_.count(ser_id)) return true;
    for (const auto& d : dropped_) {
      if (d.current_id == ser_id) return true;
    }
    return false;
  }

  SerSet filtered_sers() const {
    SerSet out;
    out.source_step = sers_.source_step;
    for (const auto& ser : sers_.sers) {
      if (!excluded(ser.id)) out.sers.push_back(ser);
    }
    return out;
  }

  void drop_active_target() {
    if (!have_target_) return;
    dropped_.push_back(DroppedSer{target_.keys, target_.ser_id});
    have_target_ = false;
    need_new_target_ = false;
  }

  // ---- stalls --------------------------------------------------------------

  void escalate_stall() {
    if (!greedy_ && mode_ == Mode::Local && have_target_) {
      // Blocked straight shot: try the graph route to the target's anchor.
      const FrontierEntry* entry = gf_.find(target_.ser_id);
      if (entry != nullptr) {
        auto path = shortest_path(graph_, store_.latest().id,
                                  entry->anchor_keyframe_id, store_);
        if (path) {
          enter_global(path->node_ids);
          return;
        }
      }
    }
    // Already following a path, or no route exists: give the target up.
    drop_active_target();
    select_from_current();
  }

  /// Picks a replacement target mid-interval (no new scan, no metrics row).
  /// Unlike select_new_target, exhausting the candidates is not terminal
  /// here: the target stays empty and step_once forces a rescan next step.
  void select_from_current() {
    if (sers_.empty()) {
      have_target_ = false;
      return;
    }
    if (greedy_) {
      if (!greedy_pick()) have_target_ = false;
      return;
    }
    while (true) {
      const SerSet candidates = filtered_sers();
      if (candidates.sers.empty()) {
        have_target_ = false;
        return;
      }
      PlanDecision d =
          plan(candidates, graph_, gf_, store_, robot_, cfg_.planner, cfg_.graph);
      if (d.kind == PlanDecision::Kind::Done) {
        have_target_ = false;
        return;
      }
      if ((robot_.pose.position - d.target).norm() <= cfg_.planner.reach_radius) {
        resolved_ser_ids_.insert(d.ser_id);
        continue;
      }
      adopt_target(*find_ser(sers_, d.ser_id));
      if (d.kind == PlanDecision::Kind::Local) {
        mode_ = Mode::Local;
      } else {
        enter_global(d.path->node_ids);
      }
      return;
    }
  }

  // ---- recording -----------------------------------------------------------

  void record(const PlanDecision& d, KeyframeId kf_id) {
    MetricsRow row;
    row.step = robot_.step;
    row.time_s = robot_.step * cfg_.dt;
    row.explored_volume_m3 = tracker_.volume();
    if (!metrics_.rows.empty()) {
      const MetricsRow& prev = metrics_.rows.back();
      const double dt = row.time_s - prev.time_s;
      row.volume_increment_m3_s =
          dt > 0.0 ? (row.explored_volume_m3 - prev.explored_volume_m3) / dt : 0.0;
    }
    row.distance_traveled_m = robot_.distance_traveled;
    row.n_sers = static_cast<int>(sers_.sers.size());
    switch (d.kind) {
      case PlanDecision::Kind::Local:
        row.decision = "LOCAL";
        row.selected_ser_id = d.ser_id;
        break;
      case PlanDecision::Kind::Global:
        row.decision = "GLOBAL";
        row.selected_ser_id = d.ser_id;
        row.anchor_keyframe_id = static_cast<int>(d.anchor_id);
        ++metrics_.global_plan_count;
        break;
      case PlanDecision::Kind::Done:
        row.decision = "DONE";
        break;
    }
    metrics_.rows.push_back(row);

    SidecarRecord rec;
    rec.step = robot_.step;
    rec.keyframe_id = kf_id;
    rec.graph_edges = graph_.edges();
    rec.frontier_entries = gf_.entries;
    rec.decision = row.decision;
    rec.selected_ser_id = row.selected_ser_id;
    rec.anchor_keyframe_id = row.anchor_keyframe_id;
    if (d.path) rec.path_nodes = d.path->node_ids;
    metrics_.sidecar.push_back(std::move(rec));

    if (hooks_.on_keyframe) hooks_.on_keyframe(store_, sers_, d, graph_, gf_);
  }

  // ---- state ---------------------------------------------------------------

  const ScenarioConfig& cfg_;
  const Environment& env_;
  const EpisodeHooks& hooks_;
  bool greedy_ = false;

  MapStore store_;
  KeyframeGraph graph_;
  SerSet sers_;
  FrontierGraph gf_;
  Submap submap_;
  ExploredVolumeTracker tracker_;
  EpisodeMetrics metrics_;
  RobotState robot_;
  std::mt19937_64 rng_;

  std::optional<Point3> last_kf_position_;
  ActiveTarget target_;
  bool have_target_ = false;
  bool need_new_target_ = false;
  Mode mode_ = Mode::Local;
  std::vector<KeyframeId> path_nodes_;
  std::size_t path_index_ = 0;
  int consecutive_stalls_ = 0;
  bool pending_rescan_ = false;
  bool terminated_ = false;
  std::vector<DroppedSer> dropped_;
  std::unordered_set<int> resolved_ser_ids_;
};

}  // namespace detail

/// Runs one full episode with the scenario's configured planner.
/// The environment must already have its reachability computed (load_scenario
/// does this). Deterministic for a fixed scenario.
inline EpisodeMetrics run_episode(const ScenarioConfig& cfg,
                                  const Environment& env,
                                  const EpisodeHooks& hooks = {}) {
  detail::EpisodeRunner runner(
      cfg, env, hooks, cfg.planner_kind == PlannerKind::GreedyBaseline);
  return runner.run();
}

/// Same loop, forced onto the greedy nearest-frontier baseline regardless of
/// the scenario's configured planner kind.
inline EpisodeMetrics run_baseline_greedy(const ScenarioConfig& cfg,
                                          const Environment& env,
                                          const EpisodeHooks& hooks = {}) {
  detail::EpisodeRunner runner(cfg, env, hooks, true);
  return runner.run();
}

}  // namespace serex
