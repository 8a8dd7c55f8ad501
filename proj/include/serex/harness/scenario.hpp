#pragma once

#include "serex/core/errors.hpp"
#include "serex/core/types.hpp"
#include "serex/graph/keyframe_graph.hpp"
#include "serex/planner/planner.hpp"
#include "serex/ser/ser.hpp"
#include "serex/sim/environment.hpp"
#include "serex/sim/sensor.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace serex {

enum class PlannerKind { Proposed, GreedyBaseline };

inline const char* to_string(PlannerKind kind) {
  return kind == PlannerKind::Proposed ? "proposed" : "greedy";
}

/// Everything an episode needs, read from a UTF-8 key-value scenario file.
struct ScenarioConfig {
  std::string name;              // scenario file stem
  std::string environment_path;  // resolved relative to the scenario file
  SensorModel sensor;
  Pose start;
  double v_max = 2.0;
  double dt = 0.25;
  double d_key = 2.0;
  SerConfig ser;
  GraphConfig graph;
  PlannerConfig planner;
  int step_budget = 5000;
  std::uint64_t seed = 1;
  PlannerKind planner_kind = PlannerKind::Proposed;
  bool contribution_on_raw_points = false;
};

struct LoadedScenario {
  ScenarioConfig config;
  Environment env;
};

namespace detail {

struct IniEntry {
  int line = 0;
  std::string section;
  std::string key;
  std::string value;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Line-based "[section] / key = value" parser. '#' starts a comment
/// anywhere on a line; blank lines are skipped. Problems are appended to
/// `issues` with file and line number.
inline std::vector<IniEntry> parse_ini(const std::string& path,
                                       std::vector<std::string>& issues) {
  std::vector<IniEntry> entries;
  std::ifstream in(path);
  if (!in) {
    issues.push_back(path + ": cannot open file");
    return entries;
  }

  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back(path + ":" + std::to_string(line_no) +
                         ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back(path + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
      continue;
    }
    IniEntry e;
    e.line = line_no;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    if (e.key.empty()) {
      issues.push_back(path + ":" + std::to_string(line_no) + ": empty key");
      continue;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

/// Typed access over parsed entries. Reads mark entries consumed so unknown
/// keys can be reported afterwards; a repeated key keeps its last value.
class KvReader {
 public:
  KvReader(std::string path, std::vector<IniEntry> entries,
           std::vector<std::string>& issues)
      : path_(std::move(path)), entries_(std::move(entries)), issues_(issues) {}

  std::optional<std::string> get_string(const std::string& section,
                                        const std::string& key) {
    std::optional<std::string> found;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].section == section && entries_[i].key == key) {
        consumed_.insert(i);
        found = entries_[i].value;
      }
    }
    return found;
  }

  double get_double(const std::string& section, const std::string& key,
                    double fallback) {
    const auto s = get_string(section, key);
    if (!s) return fallback;
    return parse_double(section, key, *s, fallback);
  }

  int get_int(const std::string& section, const std::string& key, int fallback) {
    const auto s = get_string(section, key);
    if (!s) return fallback;
    try {
      std::size_t pos = 0;
      const long v = std::stol(*s, &pos);
      if (pos != s->size()) throw std::invalid_argument("");
      return static_cast<int>(v);
    } catch (const std::exception&) {
      issue(section, key, "expected an integer, got '" + *s + "'");
      return fallback;
    }
  }

  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) {
    const auto s = get_string(section, key);
    if (!s) return fallback;
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(*s, &pos);
      if (pos != s->size()) throw std::invalid_argument("");
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      issue(section, key, "expected a non-negative integer, got '" + *s + "'");
      return fallback;
    }
  }

  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) {
    const auto s = get_string(section, key);
    if (!s) return fallback;
    if (*s == "true" || *s == "1") return true;
    if (*s == "false" || *s == "0") return false;
    issue(section, key, "expected true/false, got '" + *s + "'");
    return fallback;
  }

  std::optional<Point3> get_vec3(const std::string& section,
                                 const std::string& key) {
    const auto s = get_string(section, key);
    if (!s) return std::nullopt;
    const auto nums = parse_numbers(*s);
    if (nums.size() != 3) {
      issue(section, key, "expected three numbers, got '" + *s + "'");
      return std::nullopt;
    }
    return Point3{nums[0], nums[1], nums[2]};
  }

  /// All values of a repeated key, in file order (each a number list).
  std::vector<std::vector<double>> get_number_lists(const std::string& section,
                                                    const std::string& key) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].section == section && entries_[i].key == key) {
        consumed_.insert(i);
        out.push_back(parse_numbers(entries_[i].value));
      }
    }
    return out;
  }

  void report_unknown_keys() {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!consumed_.count(i)) {
        issues_.push_back(path_ + ":" + std::to_string(entries_[i].line) +
                          ": unknown key '" + entries_[i].key + "' in section [" +
                          entries_[i].section + "]");
      }
    }
  }

 private:
  double parse_double(const std::string& section, const std::string& key,
                      const std::string& s, double fallback) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      issue(section, key, "expected a number, got '" + s + "'");
      return fallback;
    }
  }

  /// Numbers separated by commas, whitespace, or both.
  std::vector<double> parse_numbers(const std::string& s) {
    std::string norm = s;
    for (char& c : norm) {
      if (c == ',') c = ' ';
    }
    std::vector<double> out;
    std::stringstream ss(norm);
    std::string item;
    while (ss >> item) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(item, &pos);
        if (pos != item.size() || !std::isfinite(v)) throw std::invalid_argument("");
        out.push_back(v);
      } catch (const std::exception&) {
        return {};
      }
    }
    return out;
  }

  void issue(const std::string& section, const std::string& key,
             const std::string& what) {
    issues_.push_back(path_ + ": [" + section + "] " + key + ": " + what);
  }

  std::string path_;
  std::vector<IniEntry> entries_;
  std::set<std::size_t> consumed_;
  std::vector<std::string>& issues_;
};

inline void require_positive(double v, const std::string& field,
                             std::vector<std::string>& issues) {
  if (!(v > 0.0)) issues.push_back(field + " must be positive (got " +
                                   std::to_string(v) + ")");
}

}  // namespace detail

/// Parses and fully validates a scenario file and its environment file.
/// Throws ScenarioError carrying every issue found — parse errors with line
/// numbers plus all invariant violations, collected rather than first-only.
/// On success the environment's reachable free-voxel set is already computed
/// from the start pose.
inline LoadedScenario load_scenario(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<std::string> issues;

  detail::KvReader scn(path, detail::parse_ini(path, issues), issues);

  LoadedScenario out;
  ScenarioConfig& cfg = out.config;
  cfg.name = fs::path(path).stem().string();

  // [scenario]
  const auto env_rel = scn.get_string("scenario", "environment");
  if (!env_rel) {
    issues.push_back(path + ": [scenario] environment: required key missing");
  } else {
    cfg.environment_path = (fs::path(path).parent_path() / *env_rel).string();
  }
  const auto planner_name = scn.get_string("scenario", "planner");
  if (planner_name) {
    if (*planner_name == "proposed") {
      cfg.planner_kind = PlannerKind::Proposed;
    } else if (*planner_name == "greedy") {
      cfg.planner_kind = PlannerKind::GreedyBaseline;
    } else {
      issues.push_back(path + ": [scenario] planner: expected proposed|greedy, got '" +
                       *planner_name + "'");
    }
  }
  cfg.step_budget = scn.get_int("scenario", "step_budget", cfg.step_budget);
  cfg.seed = scn.get_u64("scenario", "seed", cfg.seed);

  // [robot]
  const auto start = scn.get_vec3("robot", "start");
  if (start) {
    cfg.start.position = *start;
  } else {
    issues.push_back(path + ": [robot] start: required key missing");
  }
  cfg.start.yaw = wrap_angle(scn.get_double("robot", "yaw_deg", 0.0) * M_PI / 180.0);
  cfg.v_max = scn.get_double("robot", "v_max", cfg.v_max);
  cfg.dt = scn.get_double("robot", "dt", cfg.dt);
  cfg.d_key = scn.get_double("robot", "d_key", cfg.d_key);

  // [sensor]
  cfg.sensor.hfov_deg = scn.get_double("sensor", "hfov_deg", cfg.sensor.hfov_deg);
  cfg.sensor.vfov_deg = scn.get_double("sensor", "vfov_deg", cfg.sensor.vfov_deg);
  cfg.sensor.channels = scn.get_int("sensor", "channels", cfg.sensor.channels);
  cfg.sensor.azimuth_steps =
      scn.get_int("sensor", "azimuth_steps", cfg.sensor.azimuth_steps);
  cfg.sensor.max_range = scn.get_double("sensor", "max_range", cfg.sensor.max_range);
  cfg.sensor.noise_sigma =
      scn.get_double("sensor", "noise_sigma", cfg.sensor.noise_sigma);

  // [ser] — cluster_tol defaults to 2 * v_down when not given.
  cfg.ser.zeta_coverage = scn.get_double("ser", "zeta_coverage", cfg.ser.zeta_coverage);
  cfg.ser.v_down = scn.get_double("ser", "v_down", cfg.ser.v_down);
  cfg.ser.cluster_tol = scn.get_double("ser", "cluster_tol", 2.0 * cfg.ser.v_down);
  cfg.ser.min_cluster_size =
      scn.get_int("ser", "min_cluster_size", cfg.ser.min_cluster_size);

  // [graph]
  cfg.graph.k = scn.get_int("graph", "k", cfg.graph.k);
  cfg.graph.r_safe = scn.get_double("graph", "r_safe", cfg.graph.r_safe);

  // [planner] — reach_radius defaults to zeta_coverage / 2.
  cfg.planner.w_vol = scn.get_double("planner", "w_vol", cfg.planner.w_vol);
  cfg.planner.w_dir = scn.get_double("planner", "w_dir", cfg.planner.w_dir);
  cfg.planner.w_dis = scn.get_double("planner", "w_dis", cfg.planner.w_dis);
  cfg.planner.reach_radius =
      scn.get_double("planner", "reach_radius", 0.5 * cfg.ser.zeta_coverage);
  cfg.planner.eps_dist = scn.get_double("planner", "eps_dist", cfg.planner.eps_dist);
  cfg.contribution_on_raw_points =
      scn.get_bool("planner", "contribution_on_raw_points", false);

  scn.report_unknown_keys();

  // Environment file: voxel_size, bounds, occupied boxes.
  double voxel_size = 0.5;
  Aabb bounds;
  std::vector<Aabb> boxes;
  if (!cfg.environment_path.empty()) {
    const std::string& ep = cfg.environment_path;
    detail::KvReader env(ep, detail::parse_ini(ep, issues), issues);
    voxel_size = env.get_double("", "voxel_size", voxel_size);
    const auto bmin = env.get_vec3("", "bounds_min");
    const auto bmax = env.get_vec3("", "bounds_max");
    if (!bmin || !bmax) {
      issues.push_back(ep + ": bounds_min and bounds_max are required");
    } else {
      bounds = Aabb{*bmin, *bmax};
      for (int a = 0; a < 3; ++a) {
        if (!(bounds.min[a] < bounds.max[a])) {
          issues.push_back(ep + ": bounds_min must be strictly below bounds_max " +
                           "on every axis");
          break;
        }
      }
    }
    for (const auto& nums : env.get_number_lists("", "box")) {
      if (nums.size() != 6) {
        issues.push_back(ep + ": box: expected six numbers "
                         "(min x,y,z, max x,y,z)");
        continue;
      }
      const Aabb box{Point3{nums[0], nums[1], nums[2]},
                     Point3{nums[3], nums[4], nums[5]}};
      for (int a = 0; a < 3; ++a) {
        if (box.min[a] > box.max[a]) {
          issues.push_back(ep + ": box: min exceeds max on an axis");
          break;
        }
      }
      boxes.push_back(box);
    }
    env.report_unknown_keys();
    detail::require_positive(voxel_size, ep + ": voxel_size", issues);
  }

  // Cross-field validation, all collected.
  detail::require_positive(cfg.v_max, path + ": [robot] v_max", issues);
  detail::require_positive(cfg.dt, path + ": [robot] dt", issues);
  detail::require_positive(cfg.d_key, path + ": [robot] d_key", issues);
  if (!(cfg.sensor.hfov_deg > 0.0 && cfg.sensor.hfov_deg <= 360.0)) {
    issues.push_back(path + ": [sensor] hfov_deg must be in (0, 360]");
  }
  if (!(cfg.sensor.vfov_deg > 0.0 && cfg.sensor.vfov_deg <= 180.0)) {
    issues.push_back(path + ": [sensor] vfov_deg must be in (0, 180]");
  }
  if (cfg.sensor.channels < 1) {
    issues.push_back(path + ": [sensor] channels must be >= 1");
  }
  if (cfg.sensor.azimuth_steps < 1) {
    issues.push_back(path + ": [sensor] azimuth_steps must be >= 1");
  }
  detail::require_positive(cfg.sensor.max_range, path + ": [sensor] max_range",
                           issues);
  if (cfg.sensor.noise_sigma < 0.0) {
    issues.push_back(path + ": [sensor] noise_sigma must be >= 0");
  }
  detail::require_positive(cfg.ser.zeta_coverage, path + ": [ser] zeta_coverage",
                           issues);
  detail::require_positive(cfg.ser.v_down, path + ": [ser] v_down", issues);
  detail::require_positive(cfg.ser.cluster_tol, path + ": [ser] cluster_tol",
                           issues);
  if (cfg.ser.cluster_tol < cfg.ser.v_down) {
    issues.push_back(path + ": [ser] cluster_tol must be >= v_down");
  }
  if (cfg.ser.min_cluster_size < 1) {
    issues.push_back(path + ": [ser] min_cluster_size must be >= 1");
  }
  if (cfg.graph.k < 1) issues.push_back(path + ": [graph] k must be >= 1");
  detail::require_positive(cfg.graph.r_safe, path + ": [graph] r_safe", issues);
  detail::require_positive(cfg.planner.w_vol, path + ": [planner] w_vol", issues);
  detail::require_positive(cfg.planner.w_dir, path + ": [planner] w_dir", issues);
  detail::require_positive(cfg.planner.w_dis, path + ": [planner] w_dis", issues);
  detail::require_positive(cfg.planner.reach_radius,
                           path + ": [planner] reach_radius", issues);
  detail::require_positive(cfg.planner.eps_dist, path + ": [planner] eps_dist",
                           issues);
  if (cfg.step_budget < 1) {
    issues.push_back(path + ": [scenario] step_budget must be >= 1");
  }

  if (issues.empty()) {
    out.env = Environment(voxel_size, bounds, boxes);
    if (!out.env.bounds().contains(cfg.start.position)) {
      issues.push_back(path + ": [robot] start lies outside the environment bounds");
    } else if (!out.env.is_free_at(cfg.start.position)) {
      issues.push_back(path + ": [robot] start lies inside an occupied voxel");
    } else {
      out.env.compute_reachability(cfg.start.position);
    }
  }

  if (!issues.empty()) throw ScenarioError(std::move(issues));
  return out;
}

}  // namespace serex
