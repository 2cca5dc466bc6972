#pragma once

#include "poca/prompt.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace poca {

/// Levenshtein distance with unit insert/delete/substitute costs.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// edit_distance / max(|a|, |b|). Two empty strings are identical, so 0.
double ned(std::string_view a, std::string_view b);

/// Training reward 1 - NED.
double ned_reward(std::string_view output, std::string_view target);

int exact_match(std::string_view output, std::string_view target);

/// Distinct characters / length; 0 for the empty string.
double diversity(std::string_view s);

/// 1 - |p - anchor| / sqrt(2), in [0, 1] on the unit square.
double anchor_distance(GridPoint p, GridPoint anchor);

enum class Target { a, b };

struct RewardComponent {
  enum class Kind { ned, exact_match, diversity, anchor_distance };
  Kind kind = Kind::ned;
  Target target = Target::a;
  std::size_t anchor = 0;
  std::string name;

  /// Accepts ned_a, ned_b, exact_a, exact_b, diversity, anchor<k>.
  static RewardComponent parse(std::string_view name);
  bool for_strings() const { return kind != Kind::anchor_distance; }
};

struct RewardSpec {
  std::vector<RewardComponent> components;

  static RewardSpec parse(const std::vector<std::string>& names);
  std::size_t size() const { return components.size(); }
  std::vector<std::string> names() const;
  int index_of(std::string_view name) const;
};

/// K-vector of component rewards for one terminal output.
RewardVector evaluate(const RewardSpec& spec, const TerminalOutput& output, const Prompt& prompt);

/// Fills group.rewards from each sample's terminal output.
void evaluate_group(const RewardSpec& spec, const Prompt& prompt, Group& group);

}  // namespace poca
