#include "poca/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace poca {

const char* to_string(DifficultyBin bin) {
  switch (bin) {
    case DifficultyBin::easy: return "easy";
    case DifficultyBin::medium: return "medium";
    case DifficultyBin::hard: return "hard";
    case DifficultyBin::trimmed: return "trimmed";
  }
  return "?";
}

void CurriculumPlan::validate() const {
  if (stages == 0) throw std::invalid_argument("curriculum needs at least one stage");
  if (mixtures.size() != stages) throw std::invalid_argument("curriculum needs one mixture per stage");
  for (const auto& w : mixtures) {
    double sum = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("mixture weights must be nonnegative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("each mixture must sum to 1");
  }
  if (!(trim_fraction >= 0.0 && trim_fraction <= 0.1)) {
    throw std::invalid_argument("trim_fraction must lie in [0, 0.1]");
  }
  if (samples_per_prompt == 0) throw std::invalid_argument("samples_per_prompt must be >= 1");
}

std::size_t CurriculumPlan::stage_of(std::size_t step) const {
  if (total_steps == 0) return 0;
  return std::min(stages - 1, step * stages / total_steps);
}

std::size_t CurriculumPlan::stage_start(std::size_t stage) const {
  // Smallest step with floor(step * S / M) >= stage.
  return (stage * total_steps + stages - 1) / stages;
}

std::vector<double> ecdf_ranks(const std::vector<double>& values) {
  if (values.empty()) return {};
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(values.size());
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto le = std::upper_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin();
    out[i] = static_cast<double>(le) / n;
  }
  return out;
}

std::vector<DifficultyRecord> records_from_means(const std::vector<std::string>& ids,
                                                 const std::vector<double>& mu) {
  if (ids.size() != mu.size()) throw DimensionError("records_from_means: size mismatch");
  if (ids.empty()) throw std::invalid_argument("difficulty measurement needs a non-empty dataset");
  const auto ranks = ecdf_ranks(mu);
  std::vector<DifficultyRecord> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = {ids[i], mu[i], ranks[i], DifficultyBin::medium};
  return out;
}

std::vector<DifficultyRecord> measure_difficulty(const PolicyParams& policy,
                                                 const std::vector<Prompt>& dataset,
                                                 const RewardSpec& spec, const CurriculumPlan& plan,
                                                 const StreamKey& key) {
  if (dataset.empty()) throw std::invalid_argument("measure_difficulty: empty dataset");
  if (plan.samples_per_prompt == 0) throw std::invalid_argument("measure_difficulty: N must be >= 1");
  if (plan.difficulty_component >= spec.size()) {
    throw std::invalid_argument("difficulty_component is not a valid reward index");
  }
  std::vector<std::string> ids;
  std::vector<double> mu;
  ids.reserve(dataset.size());
  mu.reserve(dataset.size());
  for (const auto& prompt : dataset) {
    double sum = 0.0;
    for (std::size_t j = 0; j < plan.samples_per_prompt; ++j) {
      Rng rng = make_rng(key, prompt.id, j);
      const auto traj = sample_trajectory(policy, prompt, rng);
      sum += evaluate(spec, traj.output, prompt)[plan.difficulty_component];
    }
    ids.push_back(prompt.id);
    mu.push_back(sum / static_cast<double>(plan.samples_per_prompt));
  }
  return records_from_means(ids, mu);
}

DifficultyBin bin_for(double ecdf) {
  if (ecdf >= kEasyThreshold) return DifficultyBin::easy;
  if (ecdf <= kHardThreshold) return DifficultyBin::hard;
  return DifficultyBin::medium;
}

std::vector<DifficultyRecord> assign_bins(std::vector<DifficultyRecord> records,
                                          const CurriculumPlan& plan) {
  if (records.empty()) throw std::invalid_argument("assign_bins: no records");
  const auto n = records.size();
  // The epsilon keeps e.g. 0.02 * 100 from flooring to 1.
  const auto per_side = static_cast<std::size_t>(std::floor(plan.trim_fraction * static_cast<double>(n) + 1e-9));
  if (2 * per_side >= n) throw std::invalid_argument("assign_bins: trimming would empty the dataset");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].ecdf != records[b].ecdf) return records[a].ecdf < records[b].ecdf;
    return records[a].prompt_id < records[b].prompt_id;
  });
  for (std::size_t r = 0; r < n; ++r) {
    auto& rec = records[order[r]];
    rec.bin = (r < per_side || r >= n - per_side) ? DifficultyBin::trimmed : bin_for(rec.ecdf);
  }
  return records;
}

BinCensus bin_census(const std::vector<DifficultyRecord>& records) {
  BinCensus c;
  for (const auto& r : records) {
    switch (r.bin) {
      case DifficultyBin::easy: ++c.easy; break;
      case DifficultyBin::medium: ++c.medium; break;
      case DifficultyBin::hard: ++c.hard; break;
      case DifficultyBin::trimmed: ++c.trimmed; break;
    }
  }
  return c;
}

namespace {

std::array<std::vector<std::string>, 3> bin_members(const std::vector<DifficultyRecord>& records) {
  std::array<std::vector<std::string>, 3> bins;
  for (const auto& r : records) {
    if (r.bin != DifficultyBin::trimmed) bins[static_cast<std::size_t>(r.bin)].push_back(r.prompt_id);
  }
  for (auto& b : bins) std::sort(b.begin(), b.end());
  return bins;
}

Mixture renormalize(const Mixture& w, const std::array<std::vector<std::string>, 3>& bins) {
  Mixture out{};
  double total = 0.0;
  for (std::size_t b = 0; b < 3; ++b) {
    out[b] = bins[b].empty() ? 0.0 : w[b];
    total += out[b];
  }
  if (!(total > 0.0)) throw std::invalid_argument("schedule_batch: no non-empty bin has positive weight");
  for (double& v : out) v /= total;
  return out;
}

}  // namespace

Mixture effective_mixture(const std::vector<DifficultyRecord>& records, const CurriculumPlan& plan,
                          std::size_t stage) {
  if (stage >= plan.mixtures.size()) throw std::out_of_range("stage index out of range");
  return renormalize(plan.mixtures[stage], bin_members(records));
}

std::vector<std::string> schedule_batch(const std::vector<DifficultyRecord>& records,
                                        const CurriculumPlan& plan, std::size_t step,
                                        std::size_t batch_size, std::uint64_t seed) {
  if (plan.total_steps > 0 && step >= plan.total_steps) {
    throw std::out_of_range("schedule_batch: step beyond total_steps");
  }
  const auto bins = bin_members(records);
  const auto w = renormalize(plan.mixtures.at(plan.stage_of(step)), bins);
  std::vector<std::string> batch;
  batch.reserve(batch_size);
  for (std::size_t slot = 0; slot < batch_size; ++slot) {
    Rng rng = make_rng({seed, Stream::schedule, step}, "curriculum", slot);
    const double u = rng.uniform();
    const auto b = sample_categorical(std::span<const double>(w.data(), w.size()), u);
    batch.push_back(bins[b][rng.below(bins[b].size())]);
  }
  return batch;
}

std::vector<DifficultyRecord> reassess(const PolicyParams& policy, const std::vector<Prompt>& dataset,
                                       const RewardSpec& spec, const CurriculumPlan& plan,
                                       std::size_t stage_index, std::uint64_t seed) {
  auto records = measure_difficulty(policy, dataset, spec, plan, {seed, Stream::difficulty, stage_index});
  return assign_bins(std::move(records), plan);
}

}  // namespace poca
