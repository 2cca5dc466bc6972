#include "poca/rewards.hpp"

#include <algorithm>
#include <bitset>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace poca {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  // Two rolling rows of the (n+1) x (m+1) table.
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] != b[j - 1] ? 1 : 0);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double ned(std::string_view a, std::string_view b) {
  const auto longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

double ned_reward(std::string_view output, std::string_view target) {
  return 1.0 - ned(output, target);
}

int exact_match(std::string_view output, std::string_view target) {
  return output == target ? 1 : 0;
}

double diversity(std::string_view s) {
  if (s.empty()) return 0.0;
  std::bitset<256> seen;
  for (unsigned char c : s) seen.set(c);
  return static_cast<double>(seen.count()) / static_cast<double>(s.size());
}

double anchor_distance(GridPoint p, GridPoint anchor) {
  const double d = std::hypot(p.x - anchor.x, p.y - anchor.y);
  return 1.0 - d / std::sqrt(2.0);
}

RewardComponent RewardComponent::parse(std::string_view name) {
  RewardComponent c;
  c.name = std::string(name);
  if (name == "ned_a" || name == "ned_b") {
    c.kind = Kind::ned;
    c.target = name.back() == 'a' ? Target::a : Target::b;
  } else if (name == "exact_a" || name == "exact_b") {
    c.kind = Kind::exact_match;
    c.target = name.back() == 'a' ? Target::a : Target::b;
  } else if (name == "diversity") {
    c.kind = Kind::diversity;
  } else if (name.starts_with("anchor") && name.size() > 6) {
    c.kind = Kind::anchor_distance;
    const auto digits = name.substr(6);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), c.anchor);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw std::invalid_argument("bad anchor component: " + c.name);
    }
  } else {
    throw std::invalid_argument("unknown reward component: " + c.name);
  }
  return c;
}

RewardSpec RewardSpec::parse(const std::vector<std::string>& names) {
  if (names.empty()) throw std::invalid_argument("reward spec needs at least one component");
  RewardSpec spec;
  for (const auto& n : names) spec.components.push_back(RewardComponent::parse(n));
  return spec;
}

std::vector<std::string> RewardSpec::names() const {
  std::vector<std::string> out;
  for (const auto& c : components) out.push_back(c.name);
  return out;
}

int RewardSpec::index_of(std::string_view name) const {
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (components[k].name == name) return static_cast<int>(k);
  }
  return -1;
}

RewardVector evaluate(const RewardSpec& spec, const TerminalOutput& output, const Prompt& prompt) {
  RewardVector r;
  r.reserve(spec.size());
  for (const auto& c : spec.components) {
    if (c.for_strings()) {
      const auto* text = std::get_if<std::string>(&output);
      const auto* task = prompt.string_task();
      if (text == nullptr || task == nullptr) {
        throw std::invalid_argument("reward " + c.name + " needs a string output and string prompt");
      }
      const std::string& target = c.target == Target::a ? task->target_a : task->target_b;
      switch (c.kind) {
        case RewardComponent::Kind::ned: r.push_back(ned_reward(*text, target)); break;
        case RewardComponent::Kind::exact_match: r.push_back(exact_match(*text, target)); break;
        default: r.push_back(diversity(*text)); break;
      }
    } else {
      const auto* point = std::get_if<GridPoint>(&output);
      const auto* task = prompt.grid_task();
      if (point == nullptr || task == nullptr) {
        throw std::invalid_argument("reward " + c.name + " needs a grid output and grid prompt");
      }
      if (c.anchor >= task->anchors.size()) {
        throw std::invalid_argument("prompt " + prompt.id + " has no anchor " + std::to_string(c.anchor));
      }
      r.push_back(anchor_distance(*point, task->anchors[c.anchor]));
    }
  }
  return r;
}

void evaluate_group(const RewardSpec& spec, const Prompt& prompt, Group& group) {
  group.rewards.resize(static_cast<Eigen::Index>(group.size()), static_cast<Eigen::Index>(spec.size()));
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto r = evaluate(spec, group.samples[i].output, prompt);
    for (std::size_t k = 0; k < r.size(); ++k) {
      group.rewards(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = r[k];
    }
  }
}

}  // namespace poca
