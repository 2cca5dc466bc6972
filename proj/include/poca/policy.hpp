#pragma once

#include "poca/prompt.hpp"
#include "poca/rng.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace poca {

enum class PolicyKind { sequence_softmax, grid_softmax };

const char* to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

/// Tabular softmax policy. Logits are laid out row-major as
/// [bucket][position][action]; the grid policy has a single position and one
/// action per cell. A prompt selects its bucket by hashing its content, so
/// distinct prompts may share parameters.
struct PolicyParams {
  PolicyKind kind = PolicyKind::sequence_softmax;
  std::size_t buckets = 16;
  std::size_t positions = 8;
  std::size_t actions = 12;
  std::string alphabet;                // sequence only, one char per action
  std::optional<char> terminator;      // sequence only, rendering stops here
  std::size_t grid_size = 0;           // grid only, cells = grid_size^2
  std::vector<double> logits;

  static PolicyParams sequence(std::string alphabet, std::size_t max_len, std::size_t buckets,
                               std::optional<char> terminator = std::nullopt);
  static PolicyParams grid(std::size_t grid_size, std::size_t buckets);

  std::size_t offset(std::size_t bucket, std::size_t position) const {
    return (bucket * positions + position) * actions;
  }
  std::span<const double> slot(std::size_t bucket, std::size_t position) const {
    return {logits.data() + offset(bucket, position), actions};
  }
  std::span<double> slot(std::size_t bucket, std::size_t position) {
    return {logits.data() + offset(bucket, position), actions};
  }

  /// Horizon T: max_len characters, or one cell choice.
  std::size_t horizon() const { return positions; }

  bool same_shape(const PolicyParams& other) const;
};

std::size_t context_bucket(const Prompt& prompt, std::size_t buckets);

/// Numerically stable softmax / log-softmax of one slot.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

/// Draws one trajectory step by step, recording log-probs at sampling time.
Trajectory sample_trajectory(const PolicyParams& policy, const Prompt& prompt, Rng& rng);

/// G trajectories; sample i draws from make_rng(key, prompt.id, i).
Group sample_group(const PolicyParams& policy, const Prompt& prompt, std::size_t group_size,
                   const StreamKey& key);

/// Per-step log-probabilities under the current parameters.
std::vector<double> log_prob(const PolicyParams& policy, const Trajectory& trajectory);

/// Gradient of sum_t log pi(a_t) with respect to every logit. Non-zero only
/// on the visited (bucket, t) slots, where it is onehot(a_t) - softmax.
std::vector<double> log_prob_grad(const PolicyParams& policy, const Trajectory& trajectory);

/// Adds weight * d log pi(a | bucket, t) / d logits into grad.
void accumulate_score(const PolicyParams& policy, std::size_t bucket, std::size_t position,
                      int action, double weight, std::span<double> grad);

TerminalOutput render(const PolicyParams& policy, std::span<const int> actions);

GridPoint cell_center(std::size_t cell, std::size_t grid_size);

/// Action sequence that renders `text` (terminator-padded when shorter than
/// the horizon). Used to build deterministic reference policies.
std::vector<int> encode(const PolicyParams& policy, std::string_view text);

}  // namespace poca
