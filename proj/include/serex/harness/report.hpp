#pragma once

#include "serex/harness/metrics.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace serex {

namespace detail {

/// Six significant digits, the CSV/SVG float format.
inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // '\n' endings on every platform
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace detail

inline void export_csv(const EpisodeMetrics& m, const std::string& path) {
  auto out = detail::open_out(path);
  out << "step,time_s,explored_volume_m3,volume_increment_m3_s,"
         "distance_traveled_m,n_sers,decision,selected_ser_id,"
         "anchor_keyframe_id\n";
  for (const auto& r : m.rows) {
    out << r.step << ',' << detail::fmt6(r.time_s) << ','
        << detail::fmt6(r.explored_volume_m3) << ','
        << detail::fmt6(r.volume_increment_m3_s) << ','
        << detail::fmt6(r.distance_traveled_m) << ',' << r.n_sers << ','
        << r.decision << ',' << r.selected_ser_id << ','
        << r.anchor_keyframe_id << '\n';
  }
}

/// Explored volume vs simulated time as a standalone SVG line chart.
inline void export_svg(const EpisodeMetrics& m, const std::string& title,
                       const std::string& path) {
  constexpr int kW = 640, kH = 400;
  constexpr double kL = 60, kR = 20, kT = 40, kB = 50;
  const double plot_w = kW - kL - kR;
  const double plot_h = kH - kT - kB;

  double t_max = 0.0, v_max = 0.0;
  for (const auto& r : m.rows) {
    t_max = std::max(t_max, r.time_s);
    v_max = std::max(v_max, r.explored_volume_m3);
  }
  if (t_max <= 0.0) t_max = 1.0;
  if (v_max <= 0.0) v_max = 1.0;

  const auto sx = [&](double t) { return kL + plot_w * t / t_max; };
  const auto sy = [&](double v) { return kT + plot_h * (1.0 - v / v_max); };

  auto out = detail::open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
      << "\">\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";

  // Axes.
  out << "<line x1=\"" << kL << "\" y1=\"" << kT + plot_h << "\" x2=\""
      << kL + plot_w << "\" y2=\"" << kT + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL
      << "\" y2=\"" << kT + plot_h << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kL + plot_w / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">time (s)</text>\n";
  out << "<text x=\"16\" y=\"" << kT + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 "
      << kT + plot_h / 2 << ")\">explored volume (m^3)</text>\n";
  out << "<text x=\"" << kL << "\" y=\"" << kH - 32
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">0</text>\n";
  out << "<text x=\"" << kL + plot_w << "\" y=\"" << kH - 32
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" << detail::fmt6(t_max) << "</text>\n";
  out << "<text x=\"" << kL - 6 << "\" y=\"" << kT + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">" << detail::fmt6(v_max) << "</text>\n";
  out << "<text x=\"" << kL - 6 << "\" y=\"" << kT + plot_h + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">0</text>\n";

  if (!m.rows.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" "
           "points=\"";
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      if (i) out << ' ';
      out << detail::fmt6(sx(m.rows[i].time_s)) << ','
          << detail::fmt6(sy(m.rows[i].explored_volume_m3));
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

/// Per-keyframe graph snapshots as line-delimited JSON.
inline void export_sidecar(const EpisodeMetrics& m, const std::string& path) {
  auto out = detail::open_out(path);
  for (const auto& rec : m.sidecar) {
    nlohmann::json j;
    j["step"] = rec.step;
    j["keyframe_id"] = rec.keyframe_id;
    j["decision"] = rec.decision;
    j["selected_ser_id"] = rec.selected_ser_id;
    j["anchor_keyframe_id"] = rec.anchor_keyframe_id;
    auto& edges = j["graph_edges"] = nlohmann::json::array();
    for (const auto& e : rec.graph_edges) {
      edges.push_back({e.a, e.b, e.weight});
    }
    auto& entries = j["frontier_entries"] = nlohmann::json::array();
    for (const auto& fe : rec.frontier_entries) {
      entries.push_back({{"ser_id", fe.ser_id},
                         {"frontier",
                          {fe.frontier.x(), fe.frontier.y(), fe.frontier.z()}},
                         {"anchor_keyframe_id", fe.anchor_keyframe_id}});
    }
    j["path_nodes"] = rec.path_nodes;
    out << j.dump() << '\n';
  }
}

/// Writes <base>.csv, <base>.svg, and <base>.jsonl into out_dir.
inline void export_report(const EpisodeMetrics& m, const std::string& out_dir,
                          const std::string& base) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  export_csv(m, (dir / (base + ".csv")).string());
  export_svg(m, base, (dir / (base + ".svg")).string());
  export_sidecar(m, (dir / (base + ".jsonl")).string());
}

/// Distance traveled when coverage first reached `fraction` of the reachable
/// volume (the first recorded row at or past it); -1 if it never did.
inline double distance_at_coverage(const EpisodeMetrics& m, double fraction) {
  const double threshold = fraction * m.reachable_volume_m3;
  for (const auto& r : m.rows) {
    if (r.explored_volume_m3 >= threshold) return r.distance_traveled_m;
  }
  return -1.0;
}

/// Paired side-by-side summary for `explore compare`.
inline void export_compare_csv(const EpisodeMetrics& proposed,
                               const EpisodeMetrics& greedy,
                               const std::string& path) {
  auto out = detail::open_out(path);
  out << "planner,final_coverage_fraction,total_distance_m,"
         "distance_at_95_coverage_m,global_plan_count,stall_count,"
         "n_keyframes,done\n";
  const auto row = [&](const char* name, const EpisodeMetrics& m) {
    out << name << ',' << detail::fmt6(m.final_coverage_fraction) << ','
        << detail::fmt6(m.total_path_length) << ','
        << detail::fmt6(distance_at_coverage(m, 0.95)) << ','
        << m.global_plan_count << ',' << m.stall_count << ',' << m.rows.size()
        << ',' << (m.done ? 1 : 0) << '\n';
  };
  row("proposed", proposed);
  row("greedy", greedy);
}

}  // namespace serex
