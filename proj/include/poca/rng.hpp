#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace poca {

// Every random draw in the library comes from an engine derived from
// (seed, purpose, step, prompt id, index). Nothing carries hidden state
// between calls, so results do not depend on call order or thread count.
enum class Stream : std::uint64_t {
  train = 1,
  eval = 2,
  difficulty = 3,
  schedule = 4,
  best_at_k = 5,
  report = 6,
};

struct StreamKey {
  std::uint64_t seed = 0;
  Stream purpose = Stream::train;
  std::uint64_t step = 0;
};

std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // 53-bit uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

Rng make_rng(const StreamKey& key, std::string_view prompt_id, std::uint64_t index);

// Inverse-CDF draw from a normalized probability vector.
std::size_t sample_categorical(std::span<const double> probs, double u);

}  // namespace poca
