#pragma once

#include "poca/curriculum.hpp"
#include "poca/grpo.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace poca {

enum class Method { weighted_sum, harmonic, pareto, nd_only, fd_only, poca };
enum class EnvKind { string, grid };
enum class UpdateMode { batch, per_prompt };

const char* to_string(Method m);
Method method_from_string(std::string_view name);
const char* to_string(EnvKind e);
const char* to_string(UpdateMode u);

struct RunConfig {
  std::string name;  // label in comparisons; defaults to the method name
  Method method = Method::pareto;
  EnvKind env = EnvKind::string;
  std::filesystem::path dataset;
  std::filesystem::path eval_dataset;

  std::size_t group_size = 16;
  std::size_t max_len = 8;
  std::string alphabet = "abcdefghijk.";
  std::optional<char> terminator = '.';
  std::size_t grid_size = 16;
  std::size_t context_buckets = 16;
  std::vector<std::string> rewards;  // empty: env default
  std::vector<double> weights;       // empty: all ones

  double clip_epsilon = 0.2;
  double std_floor = 1e-8;
  ParetoAdvantage pareto_advantage = ParetoAdvantage::per_objective;
  double learning_rate = 0.05;
  std::size_t inner_updates = 1;
  UpdateMode update_mode = UpdateMode::batch;
  std::size_t total_steps = 300;
  std::size_t batch_size = 4;
  CurriculumPlan curriculum;

  std::size_t eval_interval = 20;
  std::size_t eval_samples = 8;
  std::size_t checkpoint_interval = 0;  // 0: final checkpoint only
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::size_t threads = 1;

  std::string label() const { return name.empty() ? to_string(method) : name; }
  bool curriculum_active() const { return method == Method::poca; }
  std::vector<std::string> reward_names() const;
  SurrogateConfig surrogate() const;
  PolicyParams initial_policy() const;
  void validate() const;
};

/// Parses the JSON configuration document. Relative dataset and output paths
/// resolve against `base_dir`. Unknown keys are rejected.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& config);

}  // namespace poca
