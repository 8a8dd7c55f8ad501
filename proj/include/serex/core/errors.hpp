#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace serex {

/// Robot entered an occupied voxel. Aborts the episode; the harness reports it.
struct CollisionError : std::runtime_error {
  explicit CollisionError(const std::string& what) : std::runtime_error(what) {}
};

/// Scenario file failed to parse or validate. Carries every issue found, not
/// just the first one.
struct ScenarioError : std::runtime_error {
  std::vector<std::string> issues;

  explicit ScenarioError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), issues(std::move(problems)) {}

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out;
    for (const auto& p : problems) {
      if (!out.empty()) out += "\n";
      out += p;
    }
    return out;
  }
};

}  // namespace serex
