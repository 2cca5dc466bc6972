#include "poca/dataset.hpp"

#include "poca/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace poca {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw std::invalid_argument(source + ":" + std::to_string(line) + ": " + what);
}

Prompt parse_record(const json& j, const std::string& source, std::size_t line) {
  if (!j.is_object()) fail(source, line, "record is not an object");
  static const std::set<std::string> string_keys{"id", "target_a", "target_b", "max_len"};
  static const std::set<std::string> grid_keys{"id", "anchors"};
  const bool grid = j.contains("anchors");
  const auto& allowed = grid ? grid_keys : string_keys;
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) fail(source, line, "unknown field '" + key + "'");
  }
  for (const auto& key : allowed) {
    if (!j.contains(key)) fail(source, line, "missing field '" + key + "'");
  }
  if (!j["id"].is_string() || j["id"].get<std::string>().empty()) fail(source, line, "id must be a non-empty string");

  Prompt p;
  p.id = j["id"].get<std::string>();
  if (grid) {
    GridTask task;
    if (!j["anchors"].is_array() || j["anchors"].empty()) fail(source, line, "anchors must be a non-empty array");
    for (const auto& a : j["anchors"]) {
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
        fail(source, line, "anchor must be [x, y]");
      }
      GridPoint pt{a[0].get<double>(), a[1].get<double>()};
      if (!(pt.x >= 0.0 && pt.x <= 1.0 && pt.y >= 0.0 && pt.y <= 1.0)) {
        fail(source, line, "anchor outside the unit square");
      }
      task.anchors.push_back(pt);
    }
    p.payload = std::move(task);
  } else {
    StringTask task;
    if (!j["target_a"].is_string() || !j["target_b"].is_string()) fail(source, line, "targets must be strings");
    if (!j["max_len"].is_number_unsigned()) fail(source, line, "max_len must be a positive integer");
    task.target_a = j["target_a"].get<std::string>();
    task.target_b = j["target_b"].get<std::string>();
    task.max_len = j["max_len"].get<std::size_t>();
    if (task.target_a.empty() || task.target_b.empty()) fail(source, line, "targets must be non-empty");
    if (task.max_len == 0 || task.target_a.size() > task.max_len || task.target_b.size() > task.max_len) {
      fail(source, line, "targets must fit in max_len");
    }
    p.payload = std::move(task);
  }
  return p;
}

}  // namespace

std::vector<Prompt> parse_prompts(std::istream& in, const std::string& source) {
  std::vector<Prompt> out;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      fail(source, line, e.what());
    }
    auto p = parse_record(j, source, line);
    if (!ids.insert(p.id).second) fail(source, line, "duplicate id '" + p.id + "'");
    if (!out.empty()) {
      if ((out.front().string_task() != nullptr) != (p.string_task() != nullptr)) {
        fail(source, line, "dataset mixes string and grid records");
      }
      if (p.string_task() && p.string_task()->max_len != out.front().string_task()->max_len) {
        fail(source, line, "max_len differs within the dataset");
      }
    }
    out.push_back(std::move(p));
  }
  if (out.empty()) throw std::invalid_argument(source + ": dataset is empty");
  return out;
}

std::vector<Prompt> load_prompts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  return parse_prompts(in, path.string());
}

std::string prompt_to_json(const Prompt& prompt) {
  json j;
  j["id"] = prompt.id;
  if (const auto* s = prompt.string_task()) {
    j["target_a"] = s->target_a;
    j["target_b"] = s->target_b;
    j["max_len"] = s->max_len;
  } else {
    json anchors = json::array();
    for (const auto& a : prompt.grid_task()->anchors) anchors.push_back({a.x, a.y});
    j["anchors"] = anchors;
  }
  return j.dump();
}

void save_prompts(const std::vector<Prompt>& prompts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& p : prompts) out << prompt_to_json(p) << '\n';
}

void validate_for_policy(const std::vector<Prompt>& prompts, const PolicyParams& policy) {
  for (const auto& p : prompts) {
    if (policy.kind == PolicyKind::sequence_softmax) {
      const auto* s = p.string_task();
      if (s == nullptr) throw std::invalid_argument("prompt " + p.id + " is not a string prompt");
      if (s->max_len != policy.positions) {
        throw std::invalid_argument("prompt " + p.id + " max_len does not match the policy horizon");
      }
      for (const auto* t : {&s->target_a, &s->target_b}) {
        for (char c : *t) {
          if (policy.alphabet.find(c) == std::string::npos || (policy.terminator && c == *policy.terminator)) {
            throw std::invalid_argument("prompt " + p.id + " uses a symbol outside the alphabet");
          }
        }
        if (t->size() < policy.positions && !policy.terminator) {
          throw std::invalid_argument("prompt " + p.id + " is shorter than max_len but the alphabet has no terminator");
        }
      }
    } else if (p.grid_task() == nullptr) {
      throw std::invalid_argument("prompt " + p.id + " is not a grid prompt");
    }
  }
}

std::string corrupt_target(const std::string& target, const std::string& symbols, double fraction,
                           std::uint64_t seed) {
  if (symbols.size() < 2) throw std::invalid_argument("corrupt_target: need at least two symbols");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("corrupt_target: fraction in [0, 1]");
  Rng rng(splitmix64(seed));
  std::vector<std::size_t> pos(target.size());
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  for (std::size_t i = pos.size(); i > 1; --i) std::swap(pos[i - 1], pos[rng.below(i)]);
  const auto flips = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(target.size())));
  std::string out = target;
  for (std::size_t f = 0; f < flips; ++f) {
    const char orig = out[pos[f]];
    char c = orig;
    while (c == orig) c = symbols[rng.below(symbols.size())];
    out[pos[f]] = c;
  }
  return out;
}

std::vector<Prompt> make_string_dataset(const StringDatasetSpec& spec) {
  if (spec.min_len == 0 || spec.min_len > spec.max_len) throw std::invalid_argument("bad target length range");
  if (spec.distinct_chars && spec.max_len > spec.symbols.size()) {
    throw std::invalid_argument("distinct targets need at least max_len symbols");
  }
  std::vector<Prompt> out;
  Rng rng(splitmix64(spec.seed ^ 0x5354524eULL));
  const int width = static_cast<int>(std::to_string(spec.count).size());
  for (std::size_t i = 0; i < spec.count; ++i) {
    const auto len = spec.min_len + rng.below(spec.max_len - spec.min_len + 1);
    std::string target;
    std::string pool = spec.symbols;
    for (std::size_t c = 0; c < len; ++c) {
      const auto k = rng.below(pool.size());
      target.push_back(pool[k]);
      if (spec.distinct_chars) pool.erase(k, 1);
    }
    std::ostringstream id;
    id << spec.id_prefix;
    id.width(width);
    id.fill('0');
    id << i;
    StringTask task{target, corrupt_target(target, spec.symbols, spec.hamming_fraction, rng.next()), spec.max_len};
    out.push_back({id.str(), task});
  }
  return out;
}

std::vector<Prompt> make_grid_dataset(const GridDatasetSpec& spec) {
  if (spec.anchors == 0) throw std::invalid_argument("grid prompts need at least one anchor");
  std::vector<Prompt> out;
  Rng rng(splitmix64(spec.seed ^ 0x47524944ULL));
  const int width = static_cast<int>(std::to_string(spec.count).size());
  for (std::size_t i = 0; i < spec.count; ++i) {
    GridTask task;
    for (std::size_t a = 0; a < spec.anchors; ++a) {
      const double x = rng.uniform();
      task.anchors.push_back({x, rng.uniform()});
    }
    std::ostringstream id;
    id << spec.id_prefix;
    id.width(width);
    id.fill('0');
    id << i;
    out.push_back({id.str(), task});
  }
  return out;
}

std::vector<Prompt> relabel(const std::vector<Prompt>& prompts, const std::string& id_prefix) {
  std::vector<Prompt> out = prompts;
  for (auto& p : out) p.id = id_prefix + p.id;
  return out;
}

}  // namespace poca
