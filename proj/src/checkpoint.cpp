#include "poca/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace poca {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'P', 'O', 'C', 'A', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw std::runtime_error("checkpoint truncated");
  return value;
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > (1u << 20)) throw std::runtime_error("checkpoint string too long");
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw std::runtime_error("checkpoint truncated");
  return s;
}

}  // namespace

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (curriculum.size() != other.curriculum.size()) return false;
  for (std::size_t i = 0; i < curriculum.size(); ++i) {
    const auto& a = curriculum[i];
    const auto& b = other.curriculum[i];
    if (a.prompt_id != b.prompt_id || a.mu != b.mu || a.ecdf != b.ecdf || a.bin != b.bin) return false;
  }
  return format_version == other.format_version && step == other.step && stage == other.stage &&
         policy.same_shape(other.policy) && policy.logits == other.policy.logits &&
         rng_seed == other.rng_seed && rng_counter == other.rng_counter;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& p = ckpt.policy;
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, ckpt.format_version);
  put<std::uint64_t>(out, ckpt.step);
  put<std::uint64_t>(out, ckpt.stage);
  put<std::uint32_t>(out, p.kind == PolicyKind::sequence_softmax ? 0u : 1u);
  put<std::uint64_t>(out, p.buckets);
  put<std::uint64_t>(out, p.positions);
  put<std::uint64_t>(out, p.actions);
  put<std::uint64_t>(out, p.grid_size);
  put_string(out, p.alphabet);
  put<std::uint8_t>(out, p.terminator ? 1 : 0);
  put<char>(out, p.terminator.value_or('\0'));
  put<std::uint64_t>(out, ckpt.rng_seed);
  put<std::uint64_t>(out, ckpt.rng_counter);
  put<std::uint64_t>(out, p.logits.size());
  out.write(reinterpret_cast<const char*>(p.logits.data()),
            static_cast<std::streamsize>(p.logits.size() * sizeof(double)));
  put<std::uint64_t>(out, ckpt.curriculum.size());
  for (const auto& r : ckpt.curriculum) {
    put_string(out, r.prompt_id);
    put<double>(out, r.mu);
    put<double>(out, r.ecdf);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(r.bin));
  }
  if (!out) throw std::runtime_error("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file");
  }
  Checkpoint c;
  c.format_version = get<std::uint32_t>(in);
  if (c.format_version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(c.format_version));
  }
  c.step = get<std::uint64_t>(in);
  c.stage = get<std::uint64_t>(in);
  const auto kind = get<std::uint32_t>(in);
  if (kind > 1) throw std::runtime_error("checkpoint has an unknown policy kind");
  auto& p = c.policy;
  p.kind = kind == 0 ? PolicyKind::sequence_softmax : PolicyKind::grid_softmax;
  p.buckets = get<std::uint64_t>(in);
  p.positions = get<std::uint64_t>(in);
  p.actions = get<std::uint64_t>(in);
  p.grid_size = get<std::uint64_t>(in);
  p.alphabet = get_string(in);
  const auto has_term = get<std::uint8_t>(in);
  const auto term = get<char>(in);
  if (has_term) p.terminator = term;
  c.rng_seed = get<std::uint64_t>(in);
  c.rng_counter = get<std::uint64_t>(in);
  const auto n = get<std::uint64_t>(in);
  if (n != p.buckets * p.positions * p.actions) throw std::runtime_error("checkpoint parameter count does not match shape");
  p.logits.resize(n);
  if (n > 0 && !in.read(reinterpret_cast<char*>(p.logits.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw std::runtime_error("checkpoint truncated");
  }
  const auto records = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < records; ++i) {
    DifficultyRecord r;
    r.prompt_id = get_string(in);
    r.mu = get<double>(in);
    r.ecdf = get<double>(in);
    const auto bin = get<std::uint8_t>(in);
    if (bin > 3) throw std::runtime_error("checkpoint has an unknown difficulty bin");
    r.bin = static_cast<DifficultyBin>(bin);
    c.curriculum.push_back(std::move(r));
  }
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace poca
