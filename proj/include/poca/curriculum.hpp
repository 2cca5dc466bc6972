#pragma once

#include "poca/policy.hpp"
#include "poca/prompt.hpp"
#include "poca/rewards.hpp"
#include "poca/rng.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace poca {

enum class DifficultyBin { easy, medium, hard, trimmed };

const char* to_string(DifficultyBin bin);

struct DifficultyRecord {
  std::string prompt_id;
  double mu = 0.0;    // mean difficulty reward over N samples
  double ecdf = 0.0;  // fraction of prompts with mu <= this mu
  DifficultyBin bin = DifficultyBin::medium;
};

using Mixture = std::array<double, 3>;  // easy, medium, hard

struct CurriculumPlan {
  std::size_t stages = 3;
  std::size_t total_steps = 300;
  std::vector<Mixture> mixtures = {{0.6, 0.3, 0.1}, {0.4, 0.5, 0.1}, {0.1, 0.6, 0.3}};
  double trim_fraction = 0.02;
  std::size_t difficulty_component = 0;
  std::size_t samples_per_prompt = 4;

  void validate() const;

  /// floor(step * S / M).
  std::size_t stage_of(std::size_t step) const;
  /// First step of each stage.
  std::size_t stage_start(std::size_t stage) const;
};

inline constexpr double kEasyThreshold = 0.7;
inline constexpr double kHardThreshold = 0.3;

/// ECDF(mu_c) = |{c' : mu_c' <= mu_c}| / |D| for every entry.
std::vector<double> ecdf_ranks(const std::vector<double>& values);

/// Mean of the designated reward component over N fresh samples per prompt,
/// followed by the ECDF rank over the whole dataset. Bins are left unset
/// (medium) until assign_bins runs.
std::vector<DifficultyRecord> measure_difficulty(const PolicyParams& policy,
                                                 const std::vector<Prompt>& dataset,
                                                 const RewardSpec& spec, const CurriculumPlan& plan,
                                                 const StreamKey& key);

/// Records from already-measured means (no sampling).
std::vector<DifficultyRecord> records_from_means(const std::vector<std::string>& ids,
                                                 const std::vector<double>& mu);

DifficultyBin bin_for(double ecdf);

/// Trims floor(trim_fraction * |D|) prompts off each end of the (ecdf, id)
/// order, then bins the rest on their original ecdf values.
std::vector<DifficultyRecord> assign_bins(std::vector<DifficultyRecord> records,
                                          const CurriculumPlan& plan);

struct BinCensus {
  std::size_t easy = 0, medium = 0, hard = 0, trimmed = 0;
};
BinCensus bin_census(const std::vector<DifficultyRecord>& records);

/// Stage mixture renormalized over the bins that still hold prompts.
Mixture effective_mixture(const std::vector<DifficultyRecord>& records, const CurriculumPlan& plan,
                          std::size_t stage);

/// Per slot: draw a bin from the stage mixture, then a prompt uniformly
/// within it (bin members ordered by id).
std::vector<std::string> schedule_batch(const std::vector<DifficultyRecord>& records,
                                        const CurriculumPlan& plan, std::size_t step,
                                        std::size_t batch_size, std::uint64_t seed);

/// Fresh measure_difficulty + assign_bins with the current policy.
std::vector<DifficultyRecord> reassess(const PolicyParams& policy, const std::vector<Prompt>& dataset,
                                       const RewardSpec& spec, const CurriculumPlan& plan,
                                       std::size_t stage_index, std::uint64_t seed);

}  // namespace poca
