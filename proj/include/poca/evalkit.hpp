#pragma once

#include "poca/pareto.hpp"
#include "poca/policy.hpp"
#include "poca/prompt.hpp"
#include "poca/rewards.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace poca {

struct PromptEval {
  std::string prompt_id;
  RewardMatrix rewards;        // k_eval_samples x K
  std::vector<int> exact;      // per sample, string env only
  std::vector<double> ned;     // per sample 1 - NED vs target_a, string env only
  double hypervolume = 0.0;    // K == 2 only
};

struct EvalReport {
  std::size_t step = 0;
  std::vector<std::string> component_names;
  std::vector<double> component_means;
  std::optional<double> exact_match_rate;
  std::optional<double> mean_ned_reward;
  std::size_t conflict_count = 0;
  std::size_t sample_count = 0;
  double hypervolume = 0.0;  // mean per-prompt hypervolume, reference (0, 0)
  std::optional<std::map<std::string, double>> front_contribution;
  std::vector<PromptEval> rows;  // in the order of the prompt list

  /// Flat metric name -> value map, as written to the metrics stream.
  std::map<std::string, double> metrics() const;
};

inline constexpr std::size_t kDefaultEvalSamples = 8;

EvalReport snapshot(const PolicyParams& policy, const std::vector<Prompt>& eval_prompts,
                    const RewardSpec& spec, std::size_t k_eval_samples, std::uint64_t seed,
                    std::size_t step = 0);

/// A metric used by best@k: exact match against target_a, or a reward component.
struct PriorityMetric {
  enum class Kind { exact_match, component };
  Kind kind = Kind::component;
  std::size_t component = 0;

  /// "exact_a" or a component name of the RewardSpec.
  static PriorityMetric parse(std::string_view name, const RewardSpec& spec);
};

/// Lexicographic argmax over rows of `scores` (columns in priority order);
/// remaining ties go to the lowest index.
std::size_t select_lexicographic(const RewardMatrix& scores);

struct BestOfK {
  std::size_t index = 0;
  TerminalOutput output;
  RewardVector rewards;
};

BestOfK best_at_k(const PolicyParams& policy, const Prompt& prompt, std::size_t k,
                  const RewardSpec& spec, const std::vector<PriorityMetric>& priority,
                  std::uint64_t seed);

/// Area dominated by `points` above `reference`, by sweeping on the first
/// coordinate.
double hypervolume_2d(const RewardMatrix& points, std::span<const double> reference);

struct ComponentDistribution {
  std::string name;
  std::vector<double> means;      // per prompt, dataset order
  std::vector<double> variances;  // per prompt, population variance
  std::vector<double> mean_ecdf;
  std::vector<double> variance_ecdf;
  std::vector<double> mean_deciles;      // 10%, 20%, ..., 100%
  std::vector<double> variance_deciles;
  double mean_spread = 0.0;  // 90th - 10th percentile of the means
};

/// Inverse-ECDF quantile: the smallest value whose ECDF reaches p.
double ecdf_quantile(std::vector<double> values, double p);
std::vector<double> deciles(const std::vector<double>& values);

std::vector<ComponentDistribution> reward_distribution_report(const PolicyParams& policy,
                                                              const std::vector<Prompt>& dataset,
                                                              const RewardSpec& spec, std::size_t n,
                                                              std::uint64_t seed);

}  // namespace poca
