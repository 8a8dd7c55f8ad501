#include <serex/planner/planner.hpp>
#include <serex/sim/environment.hpp>
#include <serex/sim/sensor.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace serex;

namespace {

SER make_ser(int id, const Point3& frontier, std::size_t volume,
             KeyframeId tag) {
  SER ser;
  ser.id = id;
  ser.frontier = frontier;
  ser.volume = volume;
  for (std::size_t i = 0; i < volume; ++i) {
    ser.points.push_back({frontier + Point3{0.1 * i, 0, 0}, tag});
  }
  return ser;
}

RobotState robot_at(const Point3& p, double yaw) {
  RobotState r;
  r.pose.position = p;
  r.pose.yaw = yaw;
  return r;
}

}  // namespace

TEST_CASE("exploration score worked examples") {
  PlannerConfig cfg;
  const RobotState robot = robot_at({0, 0, 0}, 0.0);
  const Point3 kf{0, 0, 0};

  // Straight ahead, 10 m out, 100 points: 100 / (1 * 10) = 10.
  CHECK(exploration_score(make_ser(0, {10, 0, 0}, 100, 0), robot, kf, cfg) ==
        Catch::Approx(10.0));

  // Dead astern doubles the direction penalty: 100 / (2 * 10) = 5.
  CHECK(exploration_score(make_ser(0, {-10, 0, 0}, 100, 0), robot, kf, cfg) ==
        Catch::Approx(5.0));

  // Off to the side: direction = 1.5.
  CHECK(exploration_score(make_ser(0, {0, 10, 0}, 100, 0), robot, kf, cfg) ==
        Catch::Approx(100.0 / (1.5 * 10.0)));

  // Frontier on top of the keyframe: distance floored at eps_dist.
  CHECK(exploration_score(make_ser(0, {0, 0, 0}, 100, 0), robot, kf, cfg) ==
        Catch::Approx(1000.0));

  // Weights scale each factor linearly.
  PlannerConfig weighted;
  weighted.w_vol = 2.0;
  weighted.w_dir = 3.0;
  weighted.w_dis = 5.0;
  CHECK(exploration_score(make_ser(0, {10, 0, 0}, 100, 0), robot, kf,
                          weighted) == Catch::Approx(200.0 / 150.0));
}

TEST_CASE("exploration score properties hold over random inputs") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> coord(-40.0, 40.0);
  std::uniform_real_distribution<double> yaw(-M_PI, M_PI);
  std::uniform_int_distribution<std::size_t> vol(1, 500);
  PlannerConfig cfg;

  for (int trial = 0; trial < 2000; ++trial) {
    const RobotState robot =
        robot_at({coord(rng), coord(rng), coord(rng)}, yaw(rng));
    const Point3 kf{coord(rng), coord(rng), coord(rng)};
    const Point3 frontier{coord(rng), coord(rng), coord(rng)};
    const std::size_t v = vol(rng);
    const SER ser = make_ser(0, frontier, v, 0);

    const double s = exploration_score(ser, robot, kf, cfg);
    CHECK(s > 0.0);

    // Linear in volume.
    SER doubled = ser;
    doubled.volume = 2 * v;
    CHECK(exploration_score(doubled, robot, kf, cfg) == Catch::Approx(2.0 * s));

    // The direction factor is bounded in [1, 2]: a yaw change alone moves the
    // score by at most a factor of two either way.
    const RobotState turned = robot_at(robot.pose.position, yaw(rng));
    const double s2 = exploration_score(ser, turned, kf, cfg);
    CHECK(s2 >= 0.5 * s - 1e-12);
    CHECK(s2 <= 2.0 * s + 1e-12);

    // Anti-monotone in keyframe distance along a fixed ray to the frontier.
    const Point3 toward = kf + 0.5 * (frontier - kf);
    if ((frontier - kf).norm() > 2.0 * cfg.eps_dist) {
      CHECK(exploration_score(ser, robot, toward, cfg) >= s);
    }
  }
}

TEST_CASE("select_best_frontier takes the top score, ties to smaller id") {
  PlannerConfig cfg;
  const RobotState robot = robot_at({0, 0, 0}, 0.0);
  const Point3 kf{0, 0, 0};

  SerSet sers;
  sers.sers = {make_ser(0, {20, 0, 0}, 50, 0), make_ser(1, {10, 0, 0}, 50, 0)};
  auto best = select_best_frontier(sers, robot, kf, cfg);
  REQUIRE(best.has_value());
  CHECK(best->ser_id == 1);  // closer, same volume
  CHECK(best->frontier == Point3{10, 0, 0});
  CHECK(best->score == Catch::Approx(5.0));

  // Mirror-image frontiers score identically; the smaller id wins.
  SerSet tied;
  tied.sers = {make_ser(2, {10, 1, 0}, 50, 0), make_ser(5, {10, -1, 0}, 50, 0)};
  best = select_best_frontier(tied, robot, kf, cfg);
  REQUIRE(best.has_value());
  CHECK(best->ser_id == 2);

  CHECK_FALSE(select_best_frontier(SerSet{}, robot, kf, cfg).has_value());
}

TEST_CASE("los_decision checks for the current keyframe's tag") {
  SER ser;
  ser.points = {{{1, 0, 0}, 0}, {{2, 0, 0}, 2}};
  Scan current;
  current.keyframe_id = 2;
  CHECK(los_decision(ser, current));
  current.keyframe_id = 1;
  CHECK_FALSE(los_decision(ser, current));
  SER empty;
  CHECK_FALSE(los_decision(empty, current));
}

TEST_CASE("plan routes visible frontiers locally") {
  MapStore store;
  store.add_keyframe({0, 0, 0}, 0, {{30, 0, 0}});
  store.add_keyframe({5, 0, 0}, 1, {{30, 0, 0}});
  KeyframeGraph g;
  g.add_node(0, {0, 0, 0});
  g.add_node(1, {5, 0, 0});
  g.add_edge(0, 1, 5.0);

  SerSet sers;
  sers.sers = {make_ser(0, {30, 0, 0}, 10, 1)};  // tagged by current kf 1
  const FrontierGraph gf = build_frontier_graph(sers);

  const RobotState robot = robot_at({5, 0, 0}, 0.0);
  const PlanDecision d =
      plan(sers, g, gf, store, robot, PlannerConfig{}, GraphConfig{});
  CHECK(d.kind == PlanDecision::Kind::Local);
  CHECK(d.ser_id == 0);
  CHECK(d.target == Point3{30, 0, 0});
  CHECK_FALSE(d.exhausted);
}

TEST_CASE("plan routes invisible frontiers through the graph to the anchor") {
  MapStore store;
  store.add_keyframe({0, 0, 0}, 0, {});
  store.add_keyframe({5, 0, 0}, 1, {});
  store.add_keyframe({10, 0, 0}, 2, {});
  KeyframeGraph g;
  for (KeyframeId i = 0; i < 3; ++i) g.add_node(i, store.keyframe(i).position);
  g.add_edge(0, 1, 5.0);
  g.add_edge(1, 2, 5.0);

  // Best-scoring SER was seen only from keyframe 0; current keyframe is 2.
  SerSet sers;
  sers.sers = {make_ser(0, {-20, 0, 0}, 200, 0),
               make_ser(1, {40, 0, 0}, 1, 2)};
  const FrontierGraph gf = build_frontier_graph(sers);
  REQUIRE(gf.find(0)->anchor_keyframe_id == 0);

  const RobotState robot = robot_at({10, 0, 0}, 0.0);
  const PlanDecision d =
      plan(sers, g, gf, store, robot, PlannerConfig{}, GraphConfig{});
  CHECK(d.kind == PlanDecision::Kind::Global);
  CHECK(d.ser_id == 0);
  CHECK(d.anchor_id == 0);
  CHECK(d.target == Point3{-20, 0, 0});
  REQUIRE(d.path.has_value());
  CHECK(d.path->node_ids == std::vector<KeyframeId>{2, 1, 0});
  CHECK(d.path->length == Catch::Approx(10.0));
}

TEST_CASE("plan falls through unreachable anchors to the next candidate") {
  MapStore store;
  store.add_keyframe({0, 0, 0}, 0, {});
  store.add_keyframe({5, 0, 0}, 1, {});
  KeyframeGraph g;
  g.add_node(0, {0, 0, 0});
  g.add_node(1, {5, 0, 0});
  // No edges: anchor 0 is unreachable from current keyframe 1.

  SerSet sers;
  sers.sers = {make_ser(0, {-20, 0, 0}, 200, 0),  // invisible, anchor cut off
               make_ser(1, {40, 0, 0}, 1, 1)};    // visible fallback
  const FrontierGraph gf = build_frontier_graph(sers);
  const RobotState robot = robot_at({5, 0, 0}, 0.0);

  const PlanDecision d =
      plan(sers, g, gf, store, robot, PlannerConfig{}, GraphConfig{});
  CHECK(d.kind == PlanDecision::Kind::Local);
  CHECK(d.ser_id == 1);

  // With the fallback also invisible and unreachable, planning is exhausted.
  SerSet stuck;
  stuck.sers = {make_ser(0, {-20, 0, 0}, 200, 0)};
  const PlanDecision done = plan(stuck, g, build_frontier_graph(stuck), store,
                                 robot, PlannerConfig{}, GraphConfig{});
  CHECK(done.kind == PlanDecision::Kind::Done);
  CHECK(done.exhausted);

  // No SERs at all: done, but not exhausted — the map is simply complete.
  const PlanDecision empty = plan(SerSet{}, g, FrontierGraph{}, store, robot,
                                  PlannerConfig{}, GraphConfig{});
  CHECK(empty.kind == PlanDecision::Kind::Done);
  CHECK_FALSE(empty.exhausted);
}

TEST_CASE("local_plan goes straight when clear and sidesteps walls") {
  GraphConfig cfg;  // r_safe 0.6
  const RobotState robot = robot_at({0, 0, 0}, 0.0);
  const Point3 target{5, 0, 0};

  Submap clear;
  CHECK(local_plan(robot, target, clear, cfg) == target);

  // Wall plane at x = 2 blocks the direct segment; the best detour is the
  // full step straight toward the wall, stopping well short of it.
  Submap wall;
  for (double y = -3.0; y <= 3.0; y += 0.25) {
    for (double z = -3.0; z <= 3.0; z += 0.25) {
      wall.points.push_back({2.0, y, z});
    }
  }
  const Point3 wp = local_plan(robot, target, wall, cfg);
  CHECK((wp - Point3{1.2, 0, 0}).norm() < 1e-12);
  CHECK(collision_free(robot.pose.position, wp, wall, cfg.r_safe));

  // Fully enclosed: every candidate is blocked, so the plan is to hold.
  Submap shell;
  for (int ei = -8; ei <= 8; ++ei) {
    const double el = ei * 10.0 * M_PI / 180.0;
    for (int ai = 0; ai < 36; ++ai) {
      const double az = ai * 10.0 * M_PI / 180.0;
      shell.points.push_back(0.9 * Point3{std::cos(el) * std::cos(az),
                                          std::cos(el) * std::sin(az),
                                          std::sin(el)});
    }
  }
  CHECK(local_plan(robot, target, shell, cfg) == robot.pose.position);
}

TEST_CASE("local_plan backs out when the start already violates clearance") {
  // A wall face that was scanned at point-blank range (it was backfacing
  // until the robot walked up to it). The strict clearance test would veto
  // all 48 candidates forever; the planner must instead retreat.
  GraphConfig cfg;  // r_safe 0.6
  Submap wall;
  for (double x = -4.0; x <= 4.0; x += 0.25) {
    for (double z = -2.0; z <= 2.0; z += 0.25) {
      wall.points.push_back({x, 0.2, z});
    }
  }
  const RobotState robot = robot_at({0, 0, 0}, 0.0);  // 0.2 m from the wall

  // Target on the far side of the wall: cutting through is not an option,
  // and neither is holding still.
  const Point3 beyond{0, 6, 0};
  const Point3 wp = local_plan(robot, beyond, wall, cfg);
  REQUIRE(wp != robot.pose.position);
  CHECK(wp.y() < robot.pose.position.y());  // retreating, not penetrating

  // Target along the wall: creeping sideways inside the margin would keep
  // new wall points closer than r_safe, so the move still has to retreat.
  const Point3 along{6, 0, 0};
  const Point3 wp2 = local_plan(robot, along, wall, cfg);
  REQUIRE(wp2 != robot.pose.position);
  const auto clearance = [&](const Point3& q) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : wall.points) best = std::min(best, (p - q).norm());
    return best;
  };
  CHECK(clearance(wp2) > cfg.r_safe);

  // A robot with healthy clearance keeps the strict veto: the wall is 0.8
  // away, and no candidate may approach it below r_safe.
  const RobotState safe = robot_at({0, -0.6, 0}, 0.0);
  const Point3 wp3 = local_plan(safe, beyond, wall, cfg);
  CHECK(clearance(wp3) > cfg.r_safe);
}

TEST_CASE("in a convex room every region stays visible to the newest scan") {
  // Two keyframes in an open box. Because flattening prefers the newest
  // observer, any region either keyframe mapped carries fresh tags wherever
  // the second scan re-covered it — and in a convex room it re-covers
  // everything, so no region should ever be classified out of sight.
  const Aabb bounds{{0, 0, 0}, {30, 30, 4}};
  std::vector<Aabb> walls = {
      {{0, 0, 0}, {0.5, 30, 4}},  {{29.5, 0, 0}, {30, 30, 4}},
      {{0, 0, 0}, {30, 0.5, 4}},  {{0, 29.5, 0}, {30, 30, 4}},
  };
  const Environment env(0.5, bounds, walls);

  SensorModel sensor;
  sensor.vfov_deg = 10.0;
  sensor.channels = 3;
  sensor.azimuth_steps = 180;
  sensor.max_range = 80.0;

  MapStore store;
  Pose p0{{5, 15, 2}, 0.0};
  Pose p1{{10, 15, 2}, 0.0};
  store.add_keyframe(p0.position, 0, raycast_scan(env, p0, sensor).points);
  store.add_keyframe(p1.position, 1, raycast_scan(env, p1, sensor).points);

  SerConfig cfg;  // zeta 7, v_down 2
  const SerSet sers = generate_sers(store, cfg);
  REQUIRE_FALSE(sers.empty());
  for (const auto& ser : sers.sers) {
    CHECK(los_decision(ser, store.scan(1)));
  }
}
