#include "poca/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace poca {

const char* to_string(PolicyKind kind) {
  return kind == PolicyKind::sequence_softmax ? "sequence_softmax" : "grid_softmax";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  if (name == "sequence_softmax") return PolicyKind::sequence_softmax;
  if (name == "grid_softmax") return PolicyKind::grid_softmax;
  throw std::invalid_argument("unknown policy kind: " + std::string(name));
}

PolicyParams PolicyParams::sequence(std::string alphabet, std::size_t max_len, std::size_t buckets,
                                    std::optional<char> terminator) {
  if (alphabet.size() < 2) throw std::invalid_argument("alphabet needs at least two symbols");
  if (max_len == 0) throw std::invalid_argument("max_len must be >= 1");
  if (buckets == 0) throw std::invalid_argument("context_buckets must be >= 1");
  std::string sorted = alphabet;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("alphabet has repeated symbols");
  }
  if (terminator && alphabet.find(*terminator) == std::string::npos) {
    throw std::invalid_argument("terminator must be part of the alphabet");
  }
  PolicyParams p;
  p.kind = PolicyKind::sequence_softmax;
  p.buckets = buckets;
  p.positions = max_len;
  p.actions = alphabet.size();
  p.alphabet = std::move(alphabet);
  p.terminator = terminator;
  p.logits.assign(p.buckets * p.positions * p.actions, 0.0);
  return p;
}

PolicyParams PolicyParams::grid(std::size_t grid_size, std::size_t buckets) {
  if (grid_size == 0) throw std::invalid_argument("grid_size must be >= 1");
  if (buckets == 0) throw std::invalid_argument("context_buckets must be >= 1");
  PolicyParams p;
  p.kind = PolicyKind::grid_softmax;
  p.buckets = buckets;
  p.positions = 1;
  p.actions = grid_size * grid_size;
  p.grid_size = grid_size;
  p.logits.assign(p.buckets * p.actions, 0.0);
  return p;
}

bool PolicyParams::same_shape(const PolicyParams& other) const {
  return kind == other.kind && buckets == other.buckets && positions == other.positions &&
         actions == other.actions && alphabet == other.alphabet &&
         terminator == other.terminator && grid_size == other.grid_size;
}

std::size_t context_bucket(const Prompt& prompt, std::size_t buckets) {
  std::uint64_t h = 0;
  if (const auto* s = prompt.string_task()) {
    h = splitmix64(fnv1a(s->target_a));
  } else {
    h = 0x6772696400000000ULL;
    for (const auto& a : prompt.grid_task()->anchors) {
      h = splitmix64(h ^ std::bit_cast<std::uint64_t>(a.x));
      h = splitmix64(h ^ std::bit_cast<std::uint64_t>(a.y));
    }
  }
  return static_cast<std::size_t>(h % buckets);
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  const double log_z = std::log(z);
  std::vector<double> out(logits.size());
  // (v - m) - log z stays finite where m + log z would overflow.
  for (std::size_t j = 0; j < logits.size(); ++j) out[j] = (logits[j] - m) - log_z;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  auto out = log_softmax(logits);
  for (double& v : out) v = std::exp(v);
  return out;
}

namespace {

void check_prompt_matches(const PolicyParams& policy, const Prompt& prompt) {
  const bool seq = policy.kind == PolicyKind::sequence_softmax;
  if (seq != (prompt.string_task() != nullptr)) {
    throw std::invalid_argument("prompt " + prompt.id + " does not match policy kind");
  }
}

void check_trajectory(const PolicyParams& policy, const Trajectory& t) {
  if (t.actions.empty()) throw std::invalid_argument("trajectory has no actions");
  if (t.actions.size() != policy.positions) {
    throw DimensionError("trajectory length does not match policy horizon");
  }
  if (t.bucket >= policy.buckets) throw DimensionError("trajectory bucket out of range");
  for (int a : t.actions) {
    if (a < 0 || static_cast<std::size_t>(a) >= policy.actions) {
      throw std::out_of_range("action index out of range");
    }
  }
}

}  // namespace

Trajectory sample_trajectory(const PolicyParams& policy, const Prompt& prompt, Rng& rng) {
  check_prompt_matches(policy, prompt);
  Trajectory t;
  t.prompt_id = prompt.id;
  t.bucket = context_bucket(prompt, policy.buckets);
  t.actions.reserve(policy.positions);
  t.logp_old.reserve(policy.positions);
  for (std::size_t pos = 0; pos < policy.positions; ++pos) {
    const auto logp = log_softmax(policy.slot(t.bucket, pos));
    std::vector<double> probs(logp.size());
    std::transform(logp.begin(), logp.end(), probs.begin(), [](double v) { return std::exp(v); });
    const auto a = sample_categorical(probs, rng.uniform());
    t.actions.push_back(static_cast<int>(a));
    t.logp_old.push_back(logp[a]);
  }
  t.output = render(policy, t.actions);
  return t;
}

Group sample_group(const PolicyParams& policy, const Prompt& prompt, std::size_t group_size,
                   const StreamKey& key) {
  if (group_size < 2) throw std::invalid_argument("sample_group: G must be >= 2");
  Group g;
  g.prompt_id = prompt.id;
  g.samples.reserve(group_size);
  for (std::size_t i = 0; i < group_size; ++i) {
    Rng rng = make_rng(key, prompt.id, i);
    g.samples.push_back(sample_trajectory(policy, prompt, rng));
  }
  return g;
}

std::vector<double> log_prob(const PolicyParams& policy, const Trajectory& trajectory) {
  check_trajectory(policy, trajectory);
  std::vector<double> out(trajectory.actions.size());
  for (std::size_t pos = 0; pos < trajectory.actions.size(); ++pos) {
    const auto logp = log_softmax(policy.slot(trajectory.bucket, pos));
    out[pos] = logp[static_cast<std::size_t>(trajectory.actions[pos])];
  }
  return out;
}

void accumulate_score(const PolicyParams& policy, std::size_t bucket, std::size_t position,
                      int action, double weight, std::span<double> grad) {
  if (weight == 0.0) return;
  const auto probs = softmax(policy.slot(bucket, position));
  const auto base = policy.offset(bucket, position);
  for (std::size_t j = 0; j < probs.size(); ++j) grad[base + j] -= weight * probs[j];
  grad[base + static_cast<std::size_t>(action)] += weight;
}

std::vector<double> log_prob_grad(const PolicyParams& policy, const Trajectory& trajectory) {
  check_trajectory(policy, trajectory);
  std::vector<double> grad(policy.logits.size(), 0.0);
  for (std::size_t pos = 0; pos < trajectory.actions.size(); ++pos) {
    accumulate_score(policy, trajectory.bucket, pos, trajectory.actions[pos], 1.0, grad);
  }
  return grad;
}

GridPoint cell_center(std::size_t cell, std::size_t grid_size) {
  const double n = static_cast<double>(grid_size);
  return {(static_cast<double>(cell % grid_size) + 0.5) / n,
          (static_cast<double>(cell / grid_size) + 0.5) / n};
}

TerminalOutput render(const PolicyParams& policy, std::span<const int> actions) {
  if (actions.empty()) throw std::invalid_argument("render: empty action list");
  for (int a : actions) {
    if (a < 0 || static_cast<std::size_t>(a) >= policy.actions) {
      throw std::out_of_range("render: action index out of range");
    }
  }
  if (policy.kind == PolicyKind::grid_softmax) {
    return cell_center(static_cast<std::size_t>(actions.front()), policy.grid_size);
  }
  std::string out;
  out.reserve(actions.size());
  for (int a : actions) {
    const char c = policy.alphabet[static_cast<std::size_t>(a)];
    if (policy.terminator && c == *policy.terminator) break;
    out.push_back(c);
  }
  return out;
}

std::vector<int> encode(const PolicyParams& policy, std::string_view text) {
  if (policy.kind != PolicyKind::sequence_softmax) throw std::invalid_argument("encode: not a sequence policy");
  if (text.size() > policy.positions) throw std::invalid_argument("encode: text longer than horizon");
  std::vector<int> actions;
  for (char c : text) {
    const auto j = policy.alphabet.find(c);
    if (j == std::string::npos || (policy.terminator && c == *policy.terminator)) {
      throw std::invalid_argument(std::string("encode: symbol not in alphabet: ") + c);
    }
    actions.push_back(static_cast<int>(j));
  }
  if (actions.size() < policy.positions) {
    if (!policy.terminator) throw std::invalid_argument("encode: text shorter than horizon and no terminator");
    const int term = static_cast<int>(policy.alphabet.find(*policy.terminator));
    actions.resize(policy.positions, term);
  }
  return actions;
}

}  // namespace poca
