#pragma once

#include "poca/pareto.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace poca {

struct GridPoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const GridPoint&) const = default;
};

struct StringTask {
  std::string target_a;
  std::string target_b;
  std::size_t max_len = 8;
};

struct GridTask {
  std::vector<GridPoint> anchors;
};

struct Prompt {
  std::string id;
  std::variant<StringTask, GridTask> payload;

  const StringTask* string_task() const { return std::get_if<StringTask>(&payload); }
  const GridTask* grid_task() const { return std::get_if<GridTask>(&payload); }
};

using TerminalOutput = std::variant<std::string, GridPoint>;

struct Trajectory {
  std::string prompt_id;
  std::size_t bucket = 0;
  std::vector<int> actions;
  std::vector<double> logp_old;  // per step, under the sampling policy
  TerminalOutput output;
};

struct Group {
  std::string prompt_id;
  std::vector<Trajectory> samples;
  RewardMatrix rewards;  // G x K
  std::vector<double> advantages;
  std::optional<ParetoPartition> partition;

  std::size_t size() const { return samples.size(); }
};

}  // namespace poca
