#pragma once

#include "poca/policy.hpp"
#include "poca/prompt.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace poca {

/// Line-delimited prompt records. String env:
///   {"id": str, "target_a": str, "target_b": str, "max_len": int}
/// Grid env:
///   {"id": str, "anchors": [[x, y], ...]}
/// Unknown fields, duplicate ids and mixed record kinds are rejected.
std::vector<Prompt> parse_prompts(std::istream& in, const std::string& source = "<stream>");
std::vector<Prompt> load_prompts(const std::filesystem::path& path);
void save_prompts(const std::vector<Prompt>& prompts, const std::filesystem::path& path);
std::string prompt_to_json(const Prompt& prompt);

/// Checks every prompt can be sampled and scored by `policy`.
void validate_for_policy(const std::vector<Prompt>& prompts, const PolicyParams& policy);

/// Replaces round(fraction * |target|) positions, chosen by a seeded shuffle,
/// with a different symbol from `symbols`.
std::string corrupt_target(const std::string& target, const std::string& symbols, double fraction,
                           std::uint64_t seed);

struct StringDatasetSpec {
  std::size_t count = 64;
  std::string symbols = "abcdefghijk";  // target characters (no terminator)
  std::size_t min_len = 8;
  std::size_t max_len = 8;
  double hamming_fraction = 0.5;
  bool distinct_chars = false;
  std::string id_prefix = "s";
  std::uint64_t seed = 1;
};

std::vector<Prompt> make_string_dataset(const StringDatasetSpec& spec);

struct GridDatasetSpec {
  std::size_t count = 16;
  std::size_t anchors = 2;
  std::string id_prefix = "g";
  std::uint64_t seed = 1;
};

/// Anchors drawn uniformly from the unit square.
std::vector<Prompt> make_grid_dataset(const GridDatasetSpec& spec);

/// Same targets under fresh ids, for held-out evaluation.
std::vector<Prompt> relabel(const std::vector<Prompt>& prompts, const std::string& id_prefix);

}  // namespace poca
