#include "poca/checkpoint.hpp"
#include "poca/config.hpp"
#include "poca/curriculum.hpp"
#include "poca/dataset.hpp"
#include "poca/evalkit.hpp"
#include "poca/metrics.hpp"
#include "poca/rewards.hpp"
#include "poca/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using nlohmann::ordered_json;

namespace {

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int fail(const std::string& kind, const std::string& message, const ordered_json& extra = {}) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump() << std::endl;
  return 1;
}

int cmd_train(const std::string& config_path, std::optional<std::size_t> threads,
              const std::string& resume, std::optional<std::size_t> stop_after, const std::string& out) {
  auto config = poca::load_run_config(config_path);
  if (!out.empty()) config.output_dir = out;
  if (config.output_dir.empty()) throw std::invalid_argument("config has no output_dir and --out was not given");
  poca::TrainOptions options;
  options.threads = threads;
  options.stop_after = stop_after;
  if (!resume.empty()) options.resume = poca::load_checkpoint(resume);
  const auto result = poca::train(config, options);
  ordered_json summary;
  summary["output_dir"] = config.output_dir.string();
  summary["steps"] = result.checkpoint.step;
  summary["records"] = result.records.size();
  if (!result.reports.empty()) summary["final"] = result.reports.back().metrics();
  std::cout << summary.dump() << std::endl;
  return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::vector<std::uint64_t>& seeds,
                const std::string& out, std::size_t jobs) {
  std::vector<poca::RunConfig> configs;
  for (const auto& p : config_paths) configs.push_back(poca::load_run_config(p));
  poca::CompareOptions options;
  options.jobs = jobs;
  if (!out.empty()) options.out = out;
  const auto report = poca::compare(configs, seeds, options);
  std::cout << report.table_csv();
  return 0;
}

int cmd_difficulty(const std::string& config_path, const std::string& checkpoint, const std::string& out,
                   std::size_t distribution_samples) {
  const auto config = poca::load_run_config(config_path);
  const auto prompts = poca::load_prompts(config.dataset);
  auto policy = config.initial_policy();
  std::size_t stage = 0;
  if (!checkpoint.empty()) {
    const auto ck = poca::load_checkpoint(checkpoint);
    if (!ck.policy.same_shape(policy)) throw std::invalid_argument("checkpoint policy shape does not match the config");
    policy = ck.policy;
    stage = ck.stage;
  }
  poca::validate_for_policy(prompts, policy);
  const auto spec = poca::RewardSpec::parse(config.reward_names());
  const auto records = poca::reassess(policy, prompts, spec, config.curriculum, stage, config.seed);
  std::string text;
  for (const auto& r : records) {
    ordered_json j;
    j["prompt_id"] = r.prompt_id;
    j["mu"] = r.mu;
    j["ecdf"] = r.ecdf;
    j["bin"] = poca::to_string(r.bin);
    j["stage"] = stage;
    text += j.dump() + "\n";
  }
  if (distribution_samples > 0) {
    for (const auto& d : poca::reward_distribution_report(policy, prompts, spec, distribution_samples, config.seed)) {
      ordered_json j;
      j["component"] = d.name;
      j["mean_deciles"] = d.mean_deciles;
      j["variance_deciles"] = d.variance_deciles;
      j["mean_spread"] = d.mean_spread;
      text += j.dump() + "\n";
    }
  }
  write_text(text, out);
  return 0;
}

int cmd_ned(const std::string& a, const std::string& b) {
  ordered_json j;
  j["edit_distance"] = poca::edit_distance(a, b);
  j["ned"] = poca::ned(a, b);
  std::cout << j.dump() << std::endl;
  return 0;
}

int cmd_report(const std::string& run_dir, const std::string& out) {
  const auto records = poca::load_metrics(std::filesystem::path(run_dir) / "metrics.jsonl");
  write_text(poca::metrics_csv(records), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-reward group policy optimization harness"};
  app.require_subcommand(1);

  std::string config_path, resume, out, checkpoint, run_dir;
  std::optional<std::size_t> threads, stop_after;
  std::vector<std::string> config_paths;
  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 1, distribution_samples = 0;
  std::string ned_a, ned_b;

  auto* train = app.add_subcommand("train", "Train one configuration");
  train->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--threads", threads, "Worker threads for group sampling");
  train->add_option("--resume", resume, "Checkpoint to resume from")->check(CLI::ExistingFile);
  train->add_option("--stop-after", stop_after, "Stop after this many completed steps");
  train->add_option("--out", out, "Output directory (overrides the config)");

  auto* compare = app.add_subcommand("compare", "Train several configurations over a seed list");
  compare->add_option("--configs", config_paths, "Run configurations")->required()->check(CLI::ExistingFile);
  compare->add_option("--seeds", seeds, "Seeds, comma or space separated")->required()->delimiter(',');
  compare->add_option("--out", out, "Directory for per-run outputs and comparison tables");
  compare->add_option("--jobs", jobs, "Runs executed concurrently")->check(CLI::PositiveNumber);

  auto* difficulty = app.add_subcommand("difficulty", "Measure prompt difficulty and bins");
  difficulty->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  difficulty->add_option("--checkpoint", checkpoint, "Policy checkpoint (default: initial policy)")->check(CLI::ExistingFile);
  difficulty->add_option("--out", out, "Output file (default: stdout)");
  difficulty->add_option("--distribution", distribution_samples,
                         "Also report per-component mean/variance deciles from this many samples per prompt");

  auto* ned = app.add_subcommand("ned", "Print edit distance and normalized edit distance");
  ned->add_option("a", ned_a)->required();
  ned->add_option("b", ned_b)->required();

  auto* report = app.add_subcommand("report", "Render plot data from a run's metrics stream");
  report->add_option("--run", run_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", out, "Output CSV (default: stdout)");

  std::size_t count = 0, min_len = 8, max_len = 8, anchors = 2;
  double hamming = 0.5;
  bool distinct = false;
  std::uint64_t dataset_seed = 1;
  std::string kind = "string", prefix, relabel_prefix, relabel_out;
  auto* make = app.add_subcommand("make-dataset", "Generate a synthetic prompt dataset");
  make->add_option("--kind", kind, "string or grid")->check(CLI::IsMember({"string", "grid"}));
  make->add_option("--count", count, "Number of prompts")->required();
  make->add_option("--min-len", min_len, "Shortest target (string)");
  make->add_option("--max-len", max_len, "Horizon / longest target (string)");
  make->add_option("--hamming", hamming, "Fraction of target_a positions changed in target_b");
  make->add_flag("--distinct", distinct, "Targets use distinct characters");
  make->add_option("--anchors", anchors, "Anchors per prompt (grid)");
  make->add_option("--prefix", prefix, "Id prefix");
  make->add_option("--seed", dataset_seed, "Generator seed");
  make->add_option("--out", out, "Output file")->required();
  make->add_option("--relabel-out", relabel_out, "Also write the same prompts under fresh ids here");
  make->add_option("--relabel-prefix", relabel_prefix, "Prefix prepended to ids for --relabel-out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*train) return cmd_train(config_path, threads, resume, stop_after, out);
    if (*compare) return cmd_compare(config_paths, seeds, out, jobs);
    if (*difficulty) return cmd_difficulty(config_path, checkpoint, out, distribution_samples);
    if (*ned) return cmd_ned(ned_a, ned_b);
    if (*report) return cmd_report(run_dir, out);
    if (*make) {
      std::vector<poca::Prompt> prompts;
      if (kind == "string") {
        poca::StringDatasetSpec spec;
        spec.count = count;
        spec.min_len = min_len;
        spec.max_len = max_len;
        spec.hamming_fraction = hamming;
        spec.distinct_chars = distinct;
        spec.seed = dataset_seed;
        if (!prefix.empty()) spec.id_prefix = prefix;
        prompts = poca::make_string_dataset(spec);
      } else {
        poca::GridDatasetSpec spec;
        spec.count = count;
        spec.anchors = anchors;
        spec.seed = dataset_seed;
        if (!prefix.empty()) spec.id_prefix = prefix;
        prompts = poca::make_grid_dataset(spec);
      }
      poca::save_prompts(prompts, out);
      if (!relabel_out.empty()) poca::save_prompts(poca::relabel(prompts, relabel_prefix.empty() ? "eval-" : relabel_prefix), relabel_out);
      return 0;
    }
  } catch (const poca::TrainingError& e) {
    return fail("training", e.what(), {{"step", e.step}, {"prompt_id", e.prompt_id}});
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return 1;
}
