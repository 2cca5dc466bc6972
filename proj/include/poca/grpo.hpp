#pragma once

#include "poca/pareto.hpp"
#include "poca/policy.hpp"
#include "poca/prompt.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace poca {

using RatioMatrix = RewardMatrix;  // G x T importance ratios

enum class Aggregation { weighted_sum, harmonic, pareto_masked, nd_only, fd_only };

// How the per-sample advantage is formed before Pareto masking.
enum class ParetoAdvantage {
  per_objective,  // mean of per-column standardized rewards
  scalarized,     // standardized weighted sum
  signed_unit,    // +1 on positive, -1 on negative
};

const char* to_string(Aggregation a);
Aggregation aggregation_from_string(std::string_view name);
const char* to_string(ParetoAdvantage a);
ParetoAdvantage pareto_advantage_from_string(std::string_view name);

struct SurrogateConfig {
  double clip_epsilon = 0.2;
  Aggregation aggregation = Aggregation::pareto_masked;
  std::vector<double> weights;  // empty means equal weights
  double std_floor = 1e-8;
  ParetoAdvantage pareto_advantage = ParetoAdvantage::per_objective;

  void validate(std::size_t k) const;
  std::vector<double> resolved_weights(std::size_t k) const;
};

bool uses_partition(Aggregation a);

/// (x - mean) / population std. All zeros when std < std_floor.
std::vector<double> standardize(std::span<const double> values, double std_floor);

struct AdvantageResult {
  std::vector<double> advantages;
  std::size_t clamped = 0;  // harmonic: rewards raised to the 1e-6 floor
};

inline constexpr double kHarmonicFloor = 1e-6;

AdvantageResult aggregate_advantages(const RewardMatrix& rewards, const SurrogateConfig& config,
                                     const ParetoPartition* partition);

/// Computes the partition (Pareto modes) and advantages in place.
std::size_t prepare_group(Group& group, const SurrogateConfig& config);

/// Samples that enter the objective, and the normalizer n.
IndexSet active_set(const Group& group, const SurrogateConfig& config);

RatioMatrix importance_ratios(const Group& group, const PolicyParams& policy);

/// Clipped group objective averaged over the active samples and steps.
double surrogate_value(const Group& group, const RatioMatrix& ratios, const SurrogateConfig& config);

/// Exact gradient of surrogate_value(group, importance_ratios(group, policy))
/// with advantages held constant. A clipped term that is the active minimum
/// contributes nothing.
std::vector<double> surrogate_gradient(const Group& group, const PolicyParams& policy,
                                       const SurrogateConfig& config);

/// Rows whose per-objective standardized advantages disagree in sign.
std::size_t count_conflicts(const RewardMatrix& rewards, double std_floor);

}  // namespace poca
