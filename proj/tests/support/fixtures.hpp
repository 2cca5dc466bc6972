#pragma once
// Small builders shared by the unit tests.

#include "poca/pareto.hpp"
#include "poca/prompt.hpp"

#include <initializer_list>
#include <string>
#include <vector>

namespace fixture {

inline poca::RewardMatrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<poca::RewardVector> v;
  for (const auto& r : rows) v.emplace_back(r);
  return poca::to_matrix(v);
}

inline poca::Prompt string_prompt(std::string id, std::string a, std::string b, std::size_t max_len) {
  return {std::move(id), poca::StringTask{std::move(a), std::move(b), max_len}};
}

inline poca::Prompt grid_prompt(std::string id, std::vector<poca::GridPoint> anchors) {
  return {std::move(id), poca::GridTask{std::move(anchors)}};
}

}  // namespace fixture
