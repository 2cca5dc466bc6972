#include "poca/rng.hpp"

namespace poca {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t Rng::below(std::size_t n) {
  auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

Rng make_rng(const StreamKey& key, std::string_view prompt_id, std::uint64_t index) {
  std::uint64_t h = splitmix64(key.seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(key.purpose));
  h = splitmix64(h ^ key.step);
  h = splitmix64(h ^ fnv1a(prompt_id));
  h = splitmix64(h ^ index);
  return Rng(h);
}

std::size_t sample_categorical(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    acc += probs[j];
    if (u < acc) return j;
  }
  // Rounding left u above the final partial sum; take the last nonzero entry.
  for (std::size_t j = probs.size(); j-- > 0;) {
    if (probs[j] > 0.0) return j;
  }
  return probs.size() - 1;
}

}  // namespace poca
