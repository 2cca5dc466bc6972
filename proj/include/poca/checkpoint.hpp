#pragma once

#include "poca/curriculum.hpp"
#include "poca/policy.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace poca {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Training state at a step boundary. Every random draw is keyed by
/// (seed, step), so the RNG state is the seed plus the next step to run.
struct Checkpoint {
  std::uint32_t format_version = kCheckpointVersion;
  std::uint64_t step = 0;  // steps completed
  std::uint64_t stage = 0;
  PolicyParams policy;
  std::uint64_t rng_seed = 0;
  std::uint64_t rng_counter = 0;
  std::vector<DifficultyRecord> curriculum;  // empty unless a curriculum is active

  bool operator==(const Checkpoint& other) const;
};

// Little-endian binary layout; see docs/formats.md.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace poca
