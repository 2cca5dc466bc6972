#include "poca/trainer.hpp"

#include "poca/dataset.hpp"
#include "poca/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace poca {

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min(std::max<std::size_t>(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::optional<std::size_t> first_step_reaching(const std::vector<EvalReport>& reports,
                                               const std::string& metric, double threshold) {
  for (const auto& r : reports) {
    const auto m = r.metrics();
    if (auto it = m.find(metric); it != m.end() && it->second >= threshold) return r.step;
  }
  return std::nullopt;
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::map<std::string, double> stage_metrics(const std::vector<DifficultyRecord>& records,
                                            const CurriculumPlan& plan, std::size_t stage) {
  const auto census = bin_census(records);
  const auto mix = effective_mixture(records, plan, stage);
  double mu = 0.0;
  for (const auto& r : records) mu += r.mu;
  return {{"bin/easy", static_cast<double>(census.easy)},
          {"bin/medium", static_cast<double>(census.medium)},
          {"bin/hard", static_cast<double>(census.hard)},
          {"bin/trimmed", static_cast<double>(census.trimmed)},
          {"mix/easy", mix[0]},
          {"mix/medium", mix[1]},
          {"mix/hard", mix[2]},
          {"difficulty_mean", records.empty() ? 0.0 : mu / static_cast<double>(records.size())}};
}

// Records an uninterrupted run would have written before resuming at `step`:
// evals up to and including it, stage records strictly before it.
bool precedes_resume(const MetricsRecord& r, std::size_t step) {
  return r.event == "eval" ? r.step <= step : r.step < step;
}

std::string difficulty_jsonl(const std::vector<DifficultyRecord>& records, std::size_t stage) {
  std::ostringstream out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["prompt_id"] = r.prompt_id;
    j["mu"] = r.mu;
    j["ecdf"] = r.ecdf;
    j["bin"] = to_string(r.bin);
    j["stage"] = stage;
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace

TrainResult train(const RunConfig& config, const std::vector<Prompt>& train_prompts,
                  const std::vector<Prompt>& eval_prompts, const TrainOptions& options) {
  config.validate();
  if (train_prompts.empty()) throw std::invalid_argument("training dataset is empty");
  const auto spec = RewardSpec::parse(config.reward_names());
  const auto surrogate = config.surrogate();
  const auto threads = options.threads.value_or(config.threads);
  const auto& plan = config.curriculum;
  const bool curriculum = config.curriculum_active();
  const auto M = config.total_steps;
  const auto label = config.label();

  TrainResult result;
  result.policy = config.initial_policy();
  validate_for_policy(train_prompts, result.policy);
  validate_for_policy(eval_prompts, result.policy);

  std::map<std::string, const Prompt*> by_id;
  for (const auto& p : train_prompts) by_id[p.id] = &p;

  std::size_t start = 0;
  if (options.resume) {
    const auto& ck = *options.resume;
    if (!ck.policy.same_shape(result.policy)) throw std::invalid_argument("checkpoint policy shape does not match the config");
    if (ck.rng_seed != config.seed) throw std::invalid_argument("checkpoint seed does not match the config");
    if (ck.step > M) throw std::invalid_argument("checkpoint is past total_steps");
    start = ck.step;
    result.policy = ck.policy;
    result.curriculum = ck.curriculum;
  }
  const std::size_t stop = std::min(M, options.stop_after.value_or(M));
  if (stop < start) throw std::invalid_argument("stop step precedes the resume step");

  const bool files = options.write_outputs && !config.output_dir.empty();
  std::ofstream metrics_out;
  if (files) {
    std::filesystem::create_directories(config.output_dir);
    const auto path = config.output_dir / "metrics.jsonl";
    std::vector<MetricsRecord> kept;
    if (options.resume && std::filesystem::exists(path)) {
      for (auto& r : load_metrics(path)) {
        if (precedes_resume(r, start)) kept.push_back(std::move(r));
      }
    }
    metrics_out.open(path, std::ios::trunc);
    if (!metrics_out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& r : kept) metrics_out << to_json_line(r) << '\n';

    // One block per reassessment; keep the ones that ran before `start`.
    const auto diff_path = config.output_dir / "difficulty.jsonl";
    std::string diff_kept;
    if (options.resume && curriculum && std::filesystem::exists(diff_path)) {
      std::ifstream in(diff_path);
      for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        const auto stage = nlohmann::json::parse(line).at("stage").get<std::size_t>();
        if (plan.stage_start(stage) < start) diff_kept += line + "\n";
      }
    }
    if (curriculum) std::ofstream(diff_path, std::ios::trunc) << diff_kept;
    std::ofstream(config.output_dir / "config.json") << run_config_to_json(config) << '\n';
  }

  auto emit = [&](MetricsRecord r) {
    r.method = label;
    r.seed = config.seed;
    if (files) metrics_out << to_json_line(r) << '\n' << std::flush;
    result.records.push_back(std::move(r));
  };
  auto stage_at = [&](std::size_t step) -> std::size_t { return curriculum ? plan.stage_of(step) : 0; };
  auto evaluate_at = [&](std::size_t step) {
    auto report = snapshot(result.policy, eval_prompts, spec, config.eval_samples, config.seed, step);
    MetricsRecord r;
    r.event = "eval";
    r.step = step;
    r.stage = stage_at(step == 0 ? 0 : step - 1);
    r.metrics = report.metrics();
    emit(std::move(r));
    result.reports.push_back(std::move(report));
  };
  auto make_checkpoint = [&](std::size_t step) {
    Checkpoint ck;
    ck.step = step;
    ck.stage = stage_at(step == 0 ? 0 : step - 1);
    ck.policy = result.policy;
    ck.rng_seed = config.seed;
    ck.rng_counter = step;
    ck.curriculum = result.curriculum;
    return ck;
  };

  if (start == 0) evaluate_at(0);

  std::vector<std::string> batch(config.batch_size);
  std::vector<Group> groups(config.batch_size);
  std::vector<std::vector<double>> grads(config.batch_size);
  const auto n_params = result.policy.logits.size();

  for (std::size_t s = start; s < stop; ++s) {
    const auto stage = stage_at(s);
    if (curriculum && s == plan.stage_start(stage)) {
      result.curriculum = reassess(result.policy, train_prompts, spec, plan, stage, config.seed);
      MetricsRecord r;
      r.event = "stage";
      r.step = s;
      r.stage = stage;
      r.metrics = stage_metrics(result.curriculum, plan, stage);
      emit(std::move(r));
      if (files) {
        std::ofstream(config.output_dir / "difficulty.jsonl", std::ios::app) << difficulty_jsonl(result.curriculum, stage);
      }
    }

    if (curriculum) {
      batch = schedule_batch(result.curriculum, plan, s, config.batch_size, config.seed);
    } else {
      for (std::size_t j = 0; j < config.batch_size; ++j) {
        Rng rng = make_rng({config.seed, Stream::schedule, s}, "uniform", j);
        batch[j] = train_prompts[rng.below(train_prompts.size())].id;
      }
    }

    // Groups are sampled from the policy as it stands at the start of the step.
    const PolicyParams before = result.policy;
    parallel_for(config.batch_size, threads, [&](std::size_t j) {
      const Prompt& prompt = *by_id.at(batch[j]);
      const StreamKey key{config.seed, Stream::train, (static_cast<std::uint64_t>(s) << 16) | j};
      groups[j] = sample_group(before, prompt, config.group_size, key);
      evaluate_group(spec, prompt, groups[j]);
      prepare_group(groups[j], surrogate);
      if (!all_finite({groups[j].advantages.data(), groups[j].advantages.size()})) {
        throw TrainingError(s, prompt.id, "non-finite advantage at step " + std::to_string(s) + ", prompt " + prompt.id);
      }
    });

    auto apply = [&](std::span<const double> g, double scale, const std::string& prompt_id) {
      auto& w = result.policy.logits;
      for (std::size_t i = 0; i < n_params; ++i) w[i] += config.learning_rate * scale * g[i];
      if (!all_finite(w)) {
        throw TrainingError(s, prompt_id, "non-finite parameter at step " + std::to_string(s) + ", prompt " + prompt_id);
      }
    };
    auto gradient_of = [&](std::size_t j) {
      grads[j] = surrogate_gradient(groups[j], result.policy, surrogate);
      if (!all_finite(grads[j])) {
        throw TrainingError(s, batch[j], "non-finite gradient at step " + std::to_string(s) + ", prompt " + batch[j]);
      }
    };

    if (config.update_mode == UpdateMode::batch) {
      std::vector<double> total(n_params);
      for (std::size_t u = 0; u < config.inner_updates; ++u) {
        parallel_for(config.batch_size, threads, gradient_of);
        std::fill(total.begin(), total.end(), 0.0);
        for (std::size_t j = 0; j < config.batch_size; ++j) {
          for (std::size_t i = 0; i < n_params; ++i) total[i] += grads[j][i];
        }
        apply(total, 1.0 / static_cast<double>(config.batch_size), batch.front());
      }
    } else {
      for (std::size_t j = 0; j < config.batch_size; ++j) {
        for (std::size_t u = 0; u < config.inner_updates; ++u) {
          gradient_of(j);
          apply(grads[j], 1.0, batch[j]);
        }
      }
    }

    if (options.observer) {
      StepObservation obs;
      obs.step = s;
      obs.stage = stage;
      obs.batch = &batch;
      obs.groups = &groups;
      obs.before = &before;
      obs.after = &result.policy;
      options.observer(obs);
    }

    const auto done = s + 1;
    if (done % config.eval_interval == 0 || done == M) evaluate_at(done);
    if (files && config.checkpoint_interval > 0 && done % config.checkpoint_interval == 0 && done != stop) {
      save_checkpoint(make_checkpoint(done), config.output_dir / ("checkpoint-" + std::to_string(done) + ".bin"));
    }
  }

  result.checkpoint = make_checkpoint(stop);
  if (files) {
    metrics_out.close();
    save_checkpoint(result.checkpoint, config.output_dir / "checkpoint.bin");
    std::ofstream(config.output_dir / "summary.csv") << metrics_csv(load_metrics(config.output_dir / "metrics.jsonl"));
  }
  return result;
}

TrainResult train(const RunConfig& config, const TrainOptions& options) {
  if (config.dataset.empty()) throw std::invalid_argument("config has no dataset");
  const auto prompts = load_prompts(config.dataset);
  const auto eval = config.eval_dataset.empty() ? prompts : load_prompts(config.eval_dataset);
  return train(config, prompts, eval, options);
}

const RunSummary& ComparisonReport::run(const std::string& label, std::uint64_t seed) const {
  for (const auto& r : runs) {
    if (r.label == label && r.seed == seed) return r;
  }
  throw std::out_of_range("no run " + label + " seed " + std::to_string(seed));
}

std::string ComparisonReport::table_csv() const {
  std::set<std::string> metrics;
  for (const auto& [_, m] : final_median) {
    for (const auto& [name, __] : m) metrics.insert(name);
  }
  std::ostringstream out;
  out.precision(17);
  out << "method";
  for (const auto& m : metrics) out << ',' << m;
  out << ",front_contribution\n";
  for (const auto& label : labels) {
    out << label;
    const auto& fm = final_median.at(label);
    for (const auto& m : metrics) {
      out << ',';
      if (auto it = fm.find(m); it != fm.end()) out << it->second;
    }
    out << ',' << (front_contribution.contains(label) ? front_contribution.at(label) : 0.0) << '\n';
  }
  return out.str();
}

std::string ComparisonReport::series_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "method,step,metric,median\n";
  for (const auto& label : labels) {
    for (const auto& [metric, values] : median_series.at(label)) {
      for (std::size_t i = 0; i < steps.size(); ++i) {
        out << label << ',' << steps[i] << ',' << metric << ',' << values[i] << '\n';
      }
    }
  }
  return out.str();
}

ComparisonReport compare(const std::vector<RunConfig>& configs, const std::vector<std::uint64_t>& seeds,
                         const CompareOptions& options) {
  if (configs.size() < 2) throw std::invalid_argument("compare needs at least two configs");
  if (seeds.empty()) throw std::invalid_argument("compare needs at least one seed");

  ComparisonReport report;
  report.seeds = seeds;
  std::vector<std::vector<Prompt>> train_sets;
  std::vector<Prompt> eval_set;
  std::string eval_fingerprint;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto& cfg = configs[c];
    const auto label = cfg.label();
    if (std::find(report.labels.begin(), report.labels.end(), label) != report.labels.end()) {
      throw std::invalid_argument("duplicate config label " + label);
    }
    if (cfg.env != configs.front().env) throw std::invalid_argument("configs mix environments");
    report.labels.push_back(label);
    train_sets.push_back(load_prompts(cfg.dataset));
    auto eval = cfg.eval_dataset.empty() ? train_sets.back() : load_prompts(cfg.eval_dataset);
    std::string fingerprint;
    for (const auto& p : eval) fingerprint += prompt_to_json(p) + "\n";
    if (c == 0) {
      eval_set = std::move(eval);
      eval_fingerprint = std::move(fingerprint);
    } else if (fingerprint != eval_fingerprint) {
      throw std::invalid_argument("config " + label + " uses a different evaluation set");
    }
  }

  const auto n_runs = configs.size() * seeds.size();
  report.runs.resize(n_runs);
  parallel_for(n_runs, options.jobs, [&](std::size_t i) {
    const auto c = i / seeds.size();
    RunConfig cfg = configs[c];
    cfg.seed = seeds[i % seeds.size()];
    cfg.threads = 1;
    cfg.output_dir.clear();
    if (options.out) cfg.output_dir = *options.out / cfg.label() / ("seed-" + std::to_string(cfg.seed));
    auto trained = train(cfg, train_sets[c], eval_set);
    report.runs[i] = {cfg.label(), cfg.seed, std::move(trained.reports)};
  });

  // Align on the steps every run evaluated.
  std::set<std::size_t> common;
  for (const auto& r : report.runs.front().reports) common.insert(r.step);
  for (const auto& run : report.runs) {
    std::set<std::size_t> mine;
    for (const auto& r : run.reports) mine.insert(r.step);
    std::set<std::size_t> both;
    std::set_intersection(common.begin(), common.end(), mine.begin(), mine.end(), std::inserter(both, both.end()));
    common = std::move(both);
  }
  report.steps.assign(common.begin(), common.end());

  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto& label = report.labels[c];
    std::map<std::string, std::vector<std::vector<double>>> per_step;  // metric -> step -> seeds
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const auto& run = report.runs[c * seeds.size() + si];
      for (const auto& r : run.reports) {
        const auto it = std::find(report.steps.begin(), report.steps.end(), r.step);
        if (it == report.steps.end()) continue;
        const auto idx = static_cast<std::size_t>(it - report.steps.begin());
        for (const auto& [metric, value] : r.metrics()) {
          auto& cells = per_step[metric];
          cells.resize(report.steps.size());
          cells[idx].push_back(value);
        }
      }
    }
    auto& series = report.median_series[label];
    for (const auto& [metric, cells] : per_step) {
      auto& out = series[metric];
      for (const auto& cell : cells) out.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN() : median(cell));
    }
    for (const auto& [metric, values] : series) report.final_median[label][metric] = values.back();
  }

  // Global front: per seed and per eval prompt, pool every method's final
  // samples; credits and front sizes are summed over all (seed, prompt) cells.
  std::map<std::string, double> credit;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    for (std::size_t p = 0; p < eval_set.size(); ++p) {
      std::vector<MethodSolutions> pool;
      for (std::size_t c = 0; c < configs.size(); ++c) {
        const auto& final_report = report.runs[c * seeds.size() + si].reports.back();
        pool.push_back({report.labels[c], final_report.rows[p].rewards});
      }
      auto [cell, distinct] = global_front_credit(pool);
      for (const auto& [label, v] : cell) credit[label] += v;
      report.front_size += distinct;
    }
  }
  for (const auto& label : report.labels) {
    report.front_contribution[label] = report.front_size == 0 ? 0.0 : credit[label] / static_cast<double>(report.front_size);
  }

  if (options.out) {
    std::filesystem::create_directories(*options.out);
    std::ofstream(*options.out / "comparison.csv") << report.table_csv();
    std::ofstream(*options.out / "series.csv") << report.series_csv();
  }
  return report;
}

}  // namespace poca
