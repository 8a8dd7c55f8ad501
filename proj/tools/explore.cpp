// Command-line front end: run one episode, run a paired comparison, or just
// validate a scenario file.

#include <serex/serex.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

namespace {

void print_summary(const serex::EpisodeMetrics& m, const std::string& label) {
  std::printf("%s: keyframes=%zu coverage=%.4f distance=%.2fm global=%d "
              "stalls=%d%s%s\n",
              label.c_str(), m.rows.size(), m.final_coverage_fraction,
              m.total_path_length, m.global_plan_count, m.stall_count,
              m.done ? " done" : " budget-exhausted",
              m.failed ? (" FAILED: " + m.failure_reason).c_str() : "");
}

int run_one(const std::string& scenario_path, const std::string& out_dir,
            const std::optional<std::string>& planner_override,
            const std::optional<std::uint64_t>& seed_override) {
  serex::LoadedScenario loaded = serex::load_scenario(scenario_path);
  serex::ScenarioConfig& cfg = loaded.config;
  if (planner_override) {
    cfg.planner_kind = (*planner_override == "greedy")
                           ? serex::PlannerKind::GreedyBaseline
                           : serex::PlannerKind::Proposed;
  }
  if (seed_override) cfg.seed = *seed_override;

  const serex::EpisodeMetrics m = serex::run_episode(cfg, loaded.env);
  const std::string base = cfg.name + "." + serex::to_string(cfg.planner_kind);
  serex::export_report(m, out_dir, base);
  print_summary(m, base);
  return m.failed ? 2 : 0;
}

int run_compare(const std::string& scenario_path, const std::string& out_dir,
                const std::optional<std::uint64_t>& seed_override) {
  serex::LoadedScenario loaded = serex::load_scenario(scenario_path);
  serex::ScenarioConfig cfg = loaded.config;
  if (seed_override) cfg.seed = *seed_override;

  cfg.planner_kind = serex::PlannerKind::Proposed;
  const serex::EpisodeMetrics proposed = serex::run_episode(cfg, loaded.env);
  serex::export_report(proposed, out_dir, cfg.name + ".proposed");

  cfg.planner_kind = serex::PlannerKind::GreedyBaseline;
  const serex::EpisodeMetrics greedy = serex::run_episode(cfg, loaded.env);
  serex::export_report(greedy, out_dir, cfg.name + ".greedy");

  namespace fs = std::filesystem;
  serex::export_compare_csv(
      proposed, greedy,
      (fs::path(out_dir) / (cfg.name + ".compare.csv")).string());

  print_summary(proposed, cfg.name + ".proposed");
  print_summary(greedy, cfg.name + ".greedy");
  const double dp = serex::distance_at_coverage(proposed, 0.95);
  const double dg = serex::distance_at_coverage(greedy, 0.95);
  if (dp > 0.0 && dg > 0.0) {
    std::printf("distance to 95%% coverage: proposed=%.2fm greedy=%.2fm "
                "ratio=%.3f\n",
                dp, dg, dp / dg);
  }
  return (proposed.failed || greedy.failed) ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic frontier-exploration simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::string planner;
  std::uint64_t seed = 0;
  bool seed_set = false;

  CLI::App* run = app.add_subcommand("run", "Run one episode and write reports");
  run->add_option("scenario", scenario_path, "Scenario file (.scn)")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--planner", planner, "proposed | greedy")
      ->check(CLI::IsMember({"proposed", "greedy"}));
  run->add_option("--seed", seed, "Override the scenario RNG seed")
      ->each([&](const std::string&) { seed_set = true; });

  CLI::App* cmp =
      app.add_subcommand("compare", "Run both planners and a paired summary");
  cmp->add_option("scenario", scenario_path, "Scenario file (.scn)")->required();
  cmp->add_option("--out", out_dir, "Output directory");
  cmp->add_option("--seed", seed, "Override the scenario RNG seed")
      ->each([&](const std::string&) { seed_set = true; });

  CLI::App* val =
      app.add_subcommand("validate", "Parse and validate a scenario file");
  val->add_option("scenario", scenario_path, "Scenario file (.scn)")->required();

  CLI11_PARSE(app, argc, argv);

  const std::optional<std::string> planner_override =
      planner.empty() ? std::nullopt : std::optional<std::string>(planner);
  const std::optional<std::uint64_t> seed_override =
      seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt;

  try {
    if (app.got_subcommand(val)) {
      serex::LoadedScenario loaded = serex::load_scenario(scenario_path);
      std::printf("%s: valid (reachable free voxels: %zu)\n",
                  scenario_path.c_str(), loaded.env.free_reachable().size());
      return 0;
    }
    if (app.got_subcommand(run)) {
      return run_one(scenario_path, out_dir, planner_override, seed_override);
    }
    return run_compare(scenario_path, out_dir, seed_override);
  } catch (const serex::ScenarioError& e) {
    std::fprintf(stderr, "scenario invalid:\n");
    for (const auto& issue : e.issues) {
      std::fprintf(stderr, "  %s\n", issue.c_str());
    }
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
