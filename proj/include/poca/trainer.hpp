#pragma once

#include "poca/checkpoint.hpp"
#include "poca/config.hpp"
#include "poca/evalkit.hpp"
#include "poca/metrics.hpp"

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace poca {

/// Raised when a loss, gradient or parameter stops being finite.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(std::size_t step, std::string prompt_id, const std::string& what)
      : std::runtime_error(what), step(step), prompt_id(std::move(prompt_id)) {}
  std::size_t step;
  std::string prompt_id;
};

/// What one training step saw and did; handed to TrainOptions::observer.
struct StepObservation {
  std::size_t step = 0;
  std::size_t stage = 0;
  const std::vector<std::string>* batch = nullptr;  // prompt ids, slot order
  const std::vector<Group>* groups = nullptr;       // rewards, partitions, advantages
  const PolicyParams* before = nullptr;
  const PolicyParams* after = nullptr;
};

struct TrainOptions {
  std::function<void(const StepObservation&)> observer;
  std::optional<Checkpoint> resume;
  std::optional<std::size_t> stop_after;  // completed steps; writes a checkpoint and returns
  std::optional<std::size_t> threads;     // overrides config.threads
  bool write_outputs = true;              // files under config.output_dir, if set
};

struct TrainResult {
  PolicyParams policy;
  Checkpoint checkpoint;
  std::vector<EvalReport> reports;
  std::vector<MetricsRecord> records;  // emitted by this invocation
  std::vector<DifficultyRecord> curriculum;
};

TrainResult train(const RunConfig& config, const std::vector<Prompt>& train_prompts,
                  const std::vector<Prompt>& eval_prompts, const TrainOptions& options = {});
/// Loads the datasets named by the config; the eval set defaults to the training set.
TrainResult train(const RunConfig& config, const TrainOptions& options = {});

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Exceptions are
/// rethrown on the caller, lowest index first.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// Mean of the middle pair for even counts.
double median(std::vector<double> values);

/// First eval step whose metric reaches the threshold.
std::optional<std::size_t> first_step_reaching(const std::vector<EvalReport>& reports,
                                               const std::string& metric, double threshold);

struct RunSummary {
  std::string label;
  std::uint64_t seed = 0;
  std::vector<EvalReport> reports;
};

struct ComparisonReport {
  std::vector<std::string> labels;
  std::vector<std::uint64_t> seeds;
  std::vector<RunSummary> runs;  // labels x seeds, label-major
  std::vector<std::size_t> steps;
  // label -> metric -> median over seeds, one value per entry of `steps`
  std::map<std::string, std::map<std::string, std::vector<double>>> median_series;
  std::map<std::string, std::map<std::string, double>> final_median;
  std::map<std::string, double> front_contribution;  // pooled over prompts and seeds
  std::size_t front_size = 0;

  const RunSummary& run(const std::string& label, std::uint64_t seed) const;
  std::string table_csv() const;
  std::string series_csv() const;
};

struct CompareOptions {
  std::size_t jobs = 1;                      // concurrent runs
  std::optional<std::filesystem::path> out;  // per-run outputs and report files
};

/// Trains every config under every seed and aligns the eval series. All
/// configs must share the env and the evaluation prompts.
ComparisonReport compare(const std::vector<RunConfig>& configs, const std::vector<std::uint64_t>& seeds,
                         const CompareOptions& options = {});

}  // namespace poca
