#include "poca/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace poca {

using nlohmann::json;

const char* to_string(Method m) {
  switch (m) {
    case Method::weighted_sum: return "weighted_sum";
    case Method::harmonic: return "harmonic";
    case Method::pareto: return "pareto";
    case Method::nd_only: return "nd_only";
    case Method::fd_only: return "fd_only";
    case Method::poca: return "poca";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  for (auto m : {Method::weighted_sum, Method::harmonic, Method::pareto, Method::nd_only, Method::fd_only,
                 Method::poca}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(name));
}

const char* to_string(EnvKind e) { return e == EnvKind::string ? "string" : "grid"; }
const char* to_string(UpdateMode u) { return u == UpdateMode::batch ? "batch" : "per_prompt"; }

std::vector<std::string> RunConfig::reward_names() const {
  if (!rewards.empty()) return rewards;
  if (env == EnvKind::string) return {"ned_a", "ned_b", "diversity"};
  return {"anchor0", "anchor1"};
}

SurrogateConfig RunConfig::surrogate() const {
  SurrogateConfig s;
  s.clip_epsilon = clip_epsilon;
  s.std_floor = std_floor;
  s.weights = weights;
  s.pareto_advantage = pareto_advantage;
  switch (method) {
    case Method::weighted_sum: s.aggregation = Aggregation::weighted_sum; break;
    case Method::harmonic: s.aggregation = Aggregation::harmonic; break;
    case Method::nd_only: s.aggregation = Aggregation::nd_only; break;
    case Method::fd_only: s.aggregation = Aggregation::fd_only; break;
    case Method::pareto:
    case Method::poca: s.aggregation = Aggregation::pareto_masked; break;
  }
  return s;
}

PolicyParams RunConfig::initial_policy() const {
  if (env == EnvKind::string) return PolicyParams::sequence(alphabet, max_len, context_buckets, terminator);
  return PolicyParams::grid(grid_size, context_buckets);
}

void RunConfig::validate() const {
  if (group_size < 2) throw std::invalid_argument("group_size must be >= 2");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (inner_updates == 0) throw std::invalid_argument("inner_updates must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning_rate must be finite and >= 0");
  if (eval_interval == 0) throw std::invalid_argument("eval_interval must be >= 1");
  if (eval_samples == 0) throw std::invalid_argument("eval_samples must be >= 1");
  if (threads == 0) throw std::invalid_argument("threads must be >= 1");
  const auto names = reward_names();
  const auto spec = RewardSpec::parse(names);
  for (const auto& c : spec.components) {
    if (c.kind == RewardComponent::Kind::exact_match) {
      throw std::invalid_argument("exact-match components are evaluation-only and cannot be trained on");
    }
    if (c.for_strings() != (env == EnvKind::string)) {
      throw std::invalid_argument("reward " + c.name + " does not apply to the " + to_string(env) + " env");
    }
  }
  surrogate().validate(spec.size());
  curriculum.validate();
  if (curriculum_active()) {
    if (curriculum.total_steps != total_steps) throw std::invalid_argument("curriculum total_steps out of sync");
    if (curriculum.difficulty_component >= spec.size()) {
      throw std::invalid_argument("curriculum difficulty_component is not a reward index");
    }
  }
  (void)initial_policy();
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_count(const json& j, const char* key, std::size_t& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_unsigned()) throw std::invalid_argument(std::string("'") + key + "' must be a nonnegative integer");
  out = j.at(key).get<std::size_t>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return (path.is_absolute() || base.empty()) ? path : base / path;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  reject_unknown(j,
                 {"name", "method", "env", "dataset", "eval_dataset", "group_size", "max_len", "alphabet",
                  "terminator", "grid_size", "context_buckets", "rewards", "weights", "clip_epsilon", "std_floor",
                  "pareto_advantage", "learning_rate", "inner_updates", "update_mode", "total_steps",
                  "batch_size", "curriculum", "eval_interval", "eval_samples", "checkpoint_interval", "seed",
                  "output_dir", "threads"},
                 "config");

  RunConfig c;
  read(j, "name", c.name);
  if (j.contains("method")) c.method = method_from_string(j["method"].get<std::string>());
  if (j.contains("env")) {
    const auto env = j["env"].get<std::string>();
    if (env == "string") c.env = EnvKind::string;
    else if (env == "grid") c.env = EnvKind::grid;
    else throw std::invalid_argument("env must be 'string' or 'grid'");
  }
  std::string path;
  if (j.contains("dataset")) { read(j, "dataset", path); c.dataset = resolve(base_dir, path); }
  if (j.contains("eval_dataset")) { read(j, "eval_dataset", path); c.eval_dataset = resolve(base_dir, path); }
  if (j.contains("output_dir")) { read(j, "output_dir", path); c.output_dir = resolve(base_dir, path); }
  read_count(j, "group_size", c.group_size);
  read_count(j, "max_len", c.max_len);
  read(j, "alphabet", c.alphabet);
  if (j.contains("terminator")) {
    if (j["terminator"].is_null()) {
      c.terminator.reset();
    } else {
      const auto t = j["terminator"].get<std::string>();
      if (t.size() != 1) throw std::invalid_argument("terminator must be a single character or null");
      c.terminator = t[0];
    }
  }
  read_count(j, "grid_size", c.grid_size);
  read_count(j, "context_buckets", c.context_buckets);
  read(j, "rewards", c.rewards);
  read(j, "weights", c.weights);
  read(j, "clip_epsilon", c.clip_epsilon);
  read(j, "std_floor", c.std_floor);
  if (j.contains("pareto_advantage")) c.pareto_advantage = pareto_advantage_from_string(j["pareto_advantage"].get<std::string>());
  read(j, "learning_rate", c.learning_rate);
  read_count(j, "inner_updates", c.inner_updates);
  if (j.contains("update_mode")) {
    const auto m = j["update_mode"].get<std::string>();
    if (m == "batch") c.update_mode = UpdateMode::batch;
    else if (m == "per_prompt") c.update_mode = UpdateMode::per_prompt;
    else throw std::invalid_argument("update_mode must be 'batch' or 'per_prompt'");
  }
  read_count(j, "total_steps", c.total_steps);
  read_count(j, "batch_size", c.batch_size);
  if (j.contains("curriculum")) {
    const auto& cj = j["curriculum"];
    if (!cj.is_object()) throw std::invalid_argument("curriculum must be an object");
    reject_unknown(cj, {"stages", "mixtures", "trim_fraction", "difficulty_component", "samples_per_prompt"},
                   "curriculum");
    read_count(cj, "stages", c.curriculum.stages);
    if (cj.contains("mixtures")) {
      c.curriculum.mixtures.clear();
      for (const auto& w : cj["mixtures"]) {
        if (!w.is_array() || w.size() != 3) throw std::invalid_argument("each mixture is [easy, medium, hard]");
        c.curriculum.mixtures.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>()});
      }
    }
    read(cj, "trim_fraction", c.curriculum.trim_fraction);
    read_count(cj, "difficulty_component", c.curriculum.difficulty_component);
    read_count(cj, "samples_per_prompt", c.curriculum.samples_per_prompt);
  }
  read_count(j, "eval_interval", c.eval_interval);
  read_count(j, "eval_samples", c.eval_samples);
  read_count(j, "checkpoint_interval", c.checkpoint_interval);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw std::invalid_argument("'seed' must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  read_count(j, "threads", c.threads);
  c.curriculum.total_steps = c.total_steps;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["name"] = c.label();
  j["method"] = to_string(c.method);
  j["env"] = to_string(c.env);
  j["dataset"] = c.dataset.string();
  j["eval_dataset"] = c.eval_dataset.string();
  j["group_size"] = c.group_size;
  j["max_len"] = c.max_len;
  j["alphabet"] = c.alphabet;
  j["terminator"] = c.terminator ? json(std::string(1, *c.terminator)) : json(nullptr);
  j["grid_size"] = c.grid_size;
  j["context_buckets"] = c.context_buckets;
  j["rewards"] = c.reward_names();
  j["weights"] = c.weights;
  j["clip_epsilon"] = c.clip_epsilon;
  j["std_floor"] = c.std_floor;
  j["pareto_advantage"] = to_string(c.pareto_advantage);
  j["learning_rate"] = c.learning_rate;
  j["inner_updates"] = c.inner_updates;
  j["update_mode"] = to_string(c.update_mode);
  j["total_steps"] = c.total_steps;
  j["batch_size"] = c.batch_size;
  json mixtures = json::array();
  for (const auto& w : c.curriculum.mixtures) mixtures.push_back({w[0], w[1], w[2]});
  j["curriculum"] = {{"stages", c.curriculum.stages},
                     {"mixtures", mixtures},
                     {"trim_fraction", c.curriculum.trim_fraction},
                     {"difficulty_component", c.curriculum.difficulty_component},
                     {"samples_per_prompt", c.curriculum.samples_per_prompt}};
  j["eval_interval"] = c.eval_interval;
  j["eval_samples"] = c.eval_samples;
  j["checkpoint_interval"] = c.checkpoint_interval;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  j["threads"] = c.threads;
  return j.dump(2);
}

}  // namespace poca
