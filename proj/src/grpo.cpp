#include "poca/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace poca {

const char* to_string(Aggregation a) {
  switch (a) {
    case Aggregation::weighted_sum: return "weighted_sum";
    case Aggregation::harmonic: return "harmonic";
    case Aggregation::pareto_masked: return "pareto_masked";
    case Aggregation::nd_only: return "nd_only";
    case Aggregation::fd_only: return "fd_only";
  }
  return "?";
}

Aggregation aggregation_from_string(std::string_view name) {
  for (auto a : {Aggregation::weighted_sum, Aggregation::harmonic, Aggregation::pareto_masked,
                 Aggregation::nd_only, Aggregation::fd_only}) {
    if (name == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown aggregation: " + std::string(name));
}

const char* to_string(ParetoAdvantage a) {
  switch (a) {
    case ParetoAdvantage::per_objective: return "per_objective";
    case ParetoAdvantage::scalarized: return "scalarized";
    case ParetoAdvantage::signed_unit: return "signed_unit";
  }
  return "?";
}

ParetoAdvantage pareto_advantage_from_string(std::string_view name) {
  for (auto a : {ParetoAdvantage::per_objective, ParetoAdvantage::scalarized, ParetoAdvantage::signed_unit}) {
    if (name == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown pareto advantage rule: " + std::string(name));
}

bool uses_partition(Aggregation a) {
  return a == Aggregation::pareto_masked || a == Aggregation::nd_only || a == Aggregation::fd_only;
}

void SurrogateConfig::validate(std::size_t k) const {
  if (!(clip_epsilon > 0.0)) throw std::invalid_argument("clip_epsilon must be > 0");
  if (!(std_floor > 0.0)) throw std::invalid_argument("std_floor must be > 0");
  if (!weights.empty()) {
    if (weights.size() != k) throw DimensionError("weights must have one entry per reward");
    bool any = false;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weights must be finite and nonnegative");
      any = any || w > 0.0;
    }
    if (!any) throw std::invalid_argument("weights must not all be zero");
  }
}

std::vector<double> SurrogateConfig::resolved_weights(std::size_t k) const {
  if (weights.empty()) return std::vector<double>(k, 1.0);
  return weights;
}

std::vector<double> standardize(std::span<const double> values, double std_floor) {
  if (values.size() < 2) throw std::invalid_argument("standardize: group needs G >= 2");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("standardize: non-finite value");
    mean += v;
  }
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(values.size(), 0.0);
  if (sd < std_floor) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

namespace {

std::vector<double> column(const RewardMatrix& m, Eigen::Index k) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, k);
  return out;
}

std::vector<double> weighted_scalars(const RewardMatrix& rewards, const std::vector<double>& w) {
  std::vector<double> s(static_cast<std::size_t>(rewards.rows()), 0.0);
  for (Eigen::Index i = 0; i < rewards.rows(); ++i) {
    for (Eigen::Index k = 0; k < rewards.cols(); ++k) s[static_cast<std::size_t>(i)] += w[static_cast<std::size_t>(k)] * rewards(i, k);
  }
  return s;
}

std::vector<double> per_objective_mean(const RewardMatrix& rewards, double std_floor) {
  std::vector<double> a(static_cast<std::size_t>(rewards.rows()), 0.0);
  for (Eigen::Index k = 0; k < rewards.cols(); ++k) {
    const auto z = standardize(column(rewards, k), std_floor);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += z[i];
  }
  for (double& v : a) v /= static_cast<double>(rewards.cols());
  return a;
}

void keep_only(std::vector<double>& a, const IndexSet& keep) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::binary_search(keep.begin(), keep.end(), i)) a[i] = 0.0;
  }
}

}  // namespace

AdvantageResult aggregate_advantages(const RewardMatrix& rewards, const SurrogateConfig& config,
                                     const ParetoPartition* partition) {
  const auto g = static_cast<std::size_t>(rewards.rows());
  const auto k = static_cast<std::size_t>(rewards.cols());
  if (g < 2) throw std::invalid_argument("aggregate_advantages: group needs G >= 2");
  if (k == 0) throw DimensionError("aggregate_advantages: K must be >= 1");
  if (!rewards.allFinite()) throw std::invalid_argument("aggregate_advantages: non-finite reward");
  config.validate(k);
  if (uses_partition(config.aggregation) && partition == nullptr) {
    throw std::invalid_argument(std::string("aggregation ") + to_string(config.aggregation) + " requires a partition");
  }

  AdvantageResult out;
  switch (config.aggregation) {
    case Aggregation::weighted_sum:
      out.advantages = standardize(weighted_scalars(rewards, config.resolved_weights(k)), config.std_floor);
      return out;
    case Aggregation::harmonic: {
      auto w = config.resolved_weights(k);
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      std::vector<double> s(g);
      for (std::size_t i = 0; i < g; ++i) {
        double denom = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          double r = rewards(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          if (r < kHarmonicFloor) {
            r = kHarmonicFloor;
            ++out.clamped;
          }
          denom += (w[j] / total) / r;
        }
        s[i] = 1.0 / denom;
      }
      out.advantages = standardize(s, config.std_floor);
      return out;
    }
    default: break;
  }

  switch (config.pareto_advantage) {
    case ParetoAdvantage::per_objective:
      out.advantages = per_objective_mean(rewards, config.std_floor);
      break;
    case ParetoAdvantage::scalarized:
      out.advantages = standardize(weighted_scalars(rewards, config.resolved_weights(k)), config.std_floor);
      break;
    case ParetoAdvantage::signed_unit: {
      out.advantages.assign(g, 0.0);
      const IndexSet& plus = config.aggregation == Aggregation::fd_only ? IndexSet{} :
                             config.aggregation == Aggregation::nd_only ? partition->raw_nondominated : partition->positive;
      const IndexSet& minus = config.aggregation == Aggregation::nd_only ? IndexSet{} :
                              config.aggregation == Aggregation::fd_only ? partition->raw_fully_dominated : partition->negative;
      for (auto i : minus) out.advantages[i] = -1.0;
      for (auto i : plus) out.advantages[i] = 1.0;
      break;
    }
  }

  if (config.aggregation == Aggregation::pareto_masked) {
    keep_only(out.advantages, partition->active());
  } else if (config.aggregation == Aggregation::nd_only) {
    keep_only(out.advantages, partition->raw_nondominated);
  } else {
    keep_only(out.advantages, partition->raw_fully_dominated);
  }
  return out;
}

std::size_t prepare_group(Group& group, const SurrogateConfig& config) {
  if (static_cast<std::size_t>(group.rewards.rows()) != group.size()) {
    throw DimensionError("group reward rows do not match sample count");
  }
  if (uses_partition(config.aggregation)) {
    group.partition = bi_nd_set(group.rewards);
  } else {
    group.partition.reset();
  }
  auto result = aggregate_advantages(group.rewards, config, group.partition ? &*group.partition : nullptr);
  group.advantages = std::move(result.advantages);
  return result.clamped;
}

IndexSet active_set(const Group& group, const SurrogateConfig& config) {
  if (uses_partition(config.aggregation)) {
    if (!group.partition) throw std::invalid_argument("active_set: group has no partition");
    switch (config.aggregation) {
      case Aggregation::nd_only: return group.partition->raw_nondominated;
      case Aggregation::fd_only: return group.partition->raw_fully_dominated;
      default: return group.partition->active();
    }
  }
  IndexSet all(group.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

RatioMatrix importance_ratios(const Group& group, const PolicyParams& policy) {
  const auto t = policy.horizon();
  RatioMatrix rho(static_cast<Eigen::Index>(group.size()), static_cast<Eigen::Index>(t));
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto& traj = group.samples[i];
    if (traj.logp_old.size() != t) throw DimensionError("trajectory log-prob length does not match policy");
    const auto lp = log_prob(policy, traj);
    for (std::size_t s = 0; s < t; ++s) {
      rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = std::exp(lp[s] - traj.logp_old[s]);
    }
  }
  return rho;
}

namespace {

void check_group(const Group& group) {
  if (group.advantages.size() != group.size()) {
    throw std::invalid_argument("group advantages are not populated");
  }
}

double clip(double rho, double eps) { return std::clamp(rho, 1.0 - eps, 1.0 + eps); }

}  // namespace

double surrogate_value(const Group& group, const RatioMatrix& ratios, const SurrogateConfig& config) {
  check_group(group);
  if (static_cast<std::size_t>(ratios.rows()) != group.size() || ratios.cols() == 0) {
    throw DimensionError("ratio matrix shape does not match the group");
  }
  const auto active = active_set(group, config);
  const double n = active.empty() ? 1.0 : static_cast<double>(active.size());
  const double t = static_cast<double>(ratios.cols());
  double total = 0.0;
  for (auto i : active) {
    const double a = group.advantages[i];
    double inner = 0.0;
    for (Eigen::Index s = 0; s < ratios.cols(); ++s) {
      const double rho = ratios(static_cast<Eigen::Index>(i), s);
      if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("importance ratio must be positive and finite");
      inner += std::min(rho * a, clip(rho, config.clip_epsilon) * a);
    }
    total += inner / t;
  }
  return total / n;
}

std::vector<double> surrogate_gradient(const Group& group, const PolicyParams& policy,
                                       const SurrogateConfig& config) {
  check_group(group);
  std::vector<double> grad(policy.logits.size(), 0.0);
  const auto active = active_set(group, config);
  const double n = active.empty() ? 1.0 : static_cast<double>(active.size());
  const double t = static_cast<double>(policy.horizon());
  for (auto i : active) {
    const double a = group.advantages[i];
    if (a == 0.0) continue;
    const auto& traj = group.samples[i];
    if (traj.logp_old.size() != policy.horizon()) throw DimensionError("trajectory does not match policy horizon");
    const auto lp = log_prob(policy, traj);
    for (std::size_t s = 0; s < lp.size(); ++s) {
      const double rho = std::exp(lp[s] - traj.logp_old[s]);
      if (rho * a > clip(rho, config.clip_epsilon) * a) continue;
      // d rho / d theta = rho * d log pi / d theta
      accumulate_score(policy, traj.bucket, s, traj.actions[s], a * rho / (n * t), grad);
    }
  }
  return grad;
}

std::size_t count_conflicts(const RewardMatrix& rewards, double std_floor) {
  if (rewards.rows() < 2) throw std::invalid_argument("count_conflicts: G must be >= 2");
  if (rewards.cols() < 2) throw std::invalid_argument("count_conflicts: K must be >= 2");
  const auto g = static_cast<std::size_t>(rewards.rows());
  std::vector<bool> pos(g, false), neg(g, false);
  for (Eigen::Index k = 0; k < rewards.cols(); ++k) {
    const auto z = standardize(column(rewards, k), std_floor);
    for (std::size_t i = 0; i < g; ++i) {
      if (z[i] > 0.0) pos[i] = true;
      if (z[i] < 0.0) neg[i] = true;
    }
  }
  std::size_t conflicts = 0;
  for (std::size_t i = 0; i < g; ++i) conflicts += (pos[i] && neg[i]) ? 1 : 0;
  return conflicts;
}

}  // namespace poca
