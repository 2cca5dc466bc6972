#include "poca/evalkit.hpp"

#include "poca/curriculum.hpp"
#include "poca/grpo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace poca {

std::map<std::string, double> EvalReport::metrics() const {
  std::map<std::string, double> m;
  for (std::size_t k = 0; k < component_names.size(); ++k) m["reward/" + component_names[k]] = component_means[k];
  if (exact_match_rate) m["exact_match"] = *exact_match_rate;
  if (mean_ned_reward) m["ned_reward"] = *mean_ned_reward;
  m["conflict_count"] = static_cast<double>(conflict_count);
  m["conflict_fraction"] = sample_count == 0 ? 0.0 : static_cast<double>(conflict_count) / static_cast<double>(sample_count);
  m["hypervolume"] = hypervolume;
  return m;
}

EvalReport snapshot(const PolicyParams& policy, const std::vector<Prompt>& eval_prompts,
                    const RewardSpec& spec, std::size_t k_eval_samples, std::uint64_t seed,
                    std::size_t step) {
  if (eval_prompts.empty()) throw std::invalid_argument("snapshot: empty evaluation prompt set");
  if (k_eval_samples == 0) throw std::invalid_argument("snapshot: k_eval_samples must be >= 1");

  EvalReport report;
  report.step = step;
  report.component_names = spec.names();
  report.component_means.assign(spec.size(), 0.0);
  const bool strings = policy.kind == PolicyKind::sequence_softmax;
  double exact_sum = 0.0, ned_sum = 0.0, hv_sum = 0.0;
  const std::array<double, 2> origin{0.0, 0.0};

  // Eval draws do not depend on the step, so successive snapshots share
  // their random numbers.
  const StreamKey key{seed, Stream::eval, 0};
  for (const auto& prompt : eval_prompts) {
    PromptEval row;
    row.prompt_id = prompt.id;
    row.rewards.resize(static_cast<Eigen::Index>(k_eval_samples), static_cast<Eigen::Index>(spec.size()));
    for (std::size_t j = 0; j < k_eval_samples; ++j) {
      Rng rng = make_rng(key, prompt.id, j);
      const auto traj = sample_trajectory(policy, prompt, rng);
      const auto r = evaluate(spec, traj.output, prompt);
      for (std::size_t k = 0; k < r.size(); ++k) {
        row.rewards(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = r[k];
        report.component_means[k] += r[k];
      }
      if (strings) {
        const auto& text = std::get<std::string>(traj.output);
        const auto& target = prompt.string_task()->target_a;
        row.exact.push_back(exact_match(text, target));
        row.ned.push_back(ned_reward(text, target));
        exact_sum += row.exact.back();
        ned_sum += row.ned.back();
      }
    }
    if (k_eval_samples >= 2 && spec.size() >= 2) {
      report.conflict_count += count_conflicts(row.rewards, 1e-8);
    }
    if (spec.size() == 2) {
      row.hypervolume = hypervolume_2d(row.rewards, origin);
      hv_sum += row.hypervolume;
    }
    report.rows.push_back(std::move(row));
  }

  const double total = static_cast<double>(eval_prompts.size() * k_eval_samples);
  report.sample_count = eval_prompts.size() * k_eval_samples;
  for (double& m : report.component_means) m /= total;
  if (strings) {
    report.exact_match_rate = exact_sum / total;
    report.mean_ned_reward = ned_sum / total;
  }
  report.hypervolume = hv_sum / static_cast<double>(eval_prompts.size());
  return report;
}

PriorityMetric PriorityMetric::parse(std::string_view name, const RewardSpec& spec) {
  PriorityMetric m;
  if (name == "exact_a") {
    m.kind = Kind::exact_match;
    return m;
  }
  const int idx = spec.index_of(name);
  if (idx < 0) throw std::invalid_argument("priority metric not in reward spec: " + std::string(name));
  m.kind = Kind::component;
  m.component = static_cast<std::size_t>(idx);
  return m;
}

std::size_t select_lexicographic(const RewardMatrix& scores) {
  if (scores.rows() == 0) throw std::invalid_argument("select_lexicographic: no candidates");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.rows(); ++i) {
    for (Eigen::Index m = 0; m < scores.cols(); ++m) {
      if (scores(i, m) > scores(best, m)) {
        best = i;
        break;
      }
      if (scores(i, m) < scores(best, m)) break;
    }
  }
  return static_cast<std::size_t>(best);
}

BestOfK best_at_k(const PolicyParams& policy, const Prompt& prompt, std::size_t k,
                  const RewardSpec& spec, const std::vector<PriorityMetric>& priority,
                  std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("best_at_k: k must be >= 1");
  if (priority.empty()) throw std::invalid_argument("best_at_k: empty priority list");
  std::vector<Trajectory> candidates;
  std::vector<RewardVector> rewards;
  RewardMatrix scores(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(priority.size()));
  const StreamKey key{seed, Stream::best_at_k, 0};
  for (std::size_t j = 0; j < k; ++j) {
    Rng rng = make_rng(key, prompt.id, j);
    candidates.push_back(sample_trajectory(policy, prompt, rng));
    rewards.push_back(evaluate(spec, candidates.back().output, prompt));
    for (std::size_t m = 0; m < priority.size(); ++m) {
      double v = 0.0;
      if (priority[m].kind == PriorityMetric::Kind::exact_match) {
        const auto* text = std::get_if<std::string>(&candidates.back().output);
        if (text == nullptr || prompt.string_task() == nullptr) {
          throw std::invalid_argument("best_at_k: exact match needs the string environment");
        }
        v = exact_match(*text, prompt.string_task()->target_a);
      } else {
        if (priority[m].component >= spec.size()) throw std::out_of_range("best_at_k: component index");
        v = rewards.back()[priority[m].component];
      }
      scores(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)) = v;
    }
  }
  const auto best = select_lexicographic(scores);
  return {best, candidates[best].output, rewards[best]};
}

double hypervolume_2d(const RewardMatrix& points, std::span<const double> reference) {
  if (reference.size() != 2 || (points.rows() > 0 && points.cols() != 2)) {
    throw DimensionError("hypervolume_2d: points and reference must be two-dimensional");
  }
  std::vector<std::pair<double, double>> pts;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double x = points(i, 0), y = points(i, 1);
    if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("hypervolume_2d: non-finite point");
    if (x < reference[0] || y < reference[1]) throw std::invalid_argument("hypervolume_2d: point below reference");
    pts.emplace_back(x, y);
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  double area = 0.0;
  double ceiling = reference[1];
  for (const auto& [x, y] : pts) {
    if (y > ceiling) {
      area += (x - reference[0]) * (y - ceiling);
      ceiling = y;
    }
  }
  return area;
}

double ecdf_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("ecdf_quantile: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto idx = static_cast<long>(std::ceil(p * n - 1e-9)) - 1;
  idx = std::clamp(idx, 0L, static_cast<long>(values.size()) - 1);
  return values[static_cast<std::size_t>(idx)];
}

std::vector<double> deciles(const std::vector<double>& values) {
  std::vector<double> out;
  for (int d = 1; d <= 10; ++d) out.push_back(ecdf_quantile(values, d / 10.0));
  return out;
}

std::vector<ComponentDistribution> reward_distribution_report(const PolicyParams& policy,
                                                              const std::vector<Prompt>& dataset,
                                                              const RewardSpec& spec, std::size_t n,
                                                              std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("reward_distribution_report: N must be >= 2");
  if (dataset.empty()) throw std::invalid_argument("reward_distribution_report: empty dataset");
  std::vector<ComponentDistribution> out(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) out[k].name = spec.components[k].name;

  const StreamKey key{seed, Stream::report, 0};
  for (const auto& prompt : dataset) {
    std::vector<RewardVector> draws;
    for (std::size_t j = 0; j < n; ++j) {
      Rng rng = make_rng(key, prompt.id, j);
      draws.push_back(evaluate(spec, sample_trajectory(policy, prompt, rng).output, prompt));
    }
    for (std::size_t k = 0; k < spec.size(); ++k) {
      double mean = 0.0;
      for (const auto& d : draws) mean += d[k];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (const auto& d : draws) var += (d[k] - mean) * (d[k] - mean);
      out[k].means.push_back(mean);
      out[k].variances.push_back(var / static_cast<double>(n));
    }
  }
  for (auto& c : out) {
    c.mean_ecdf = ecdf_ranks(c.means);
    c.variance_ecdf = ecdf_ranks(c.variances);
    c.mean_deciles = deciles(c.means);
    c.variance_deciles = deciles(c.variances);
    c.mean_spread = ecdf_quantile(c.means, 0.9) - ecdf_quantile(c.means, 0.1);
  }
  return out;
}

}  // namespace poca
