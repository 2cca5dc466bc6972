#include "poca/metrics.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace poca {

using nlohmann::json;

std::string to_json_line(const MetricsRecord& r) {
  json m = json::object();
  for (const auto& [k, v] : r.metrics) m[k] = v;
  nlohmann::ordered_json j;
  j["v"] = kMetricsVersion;
  j["event"] = r.event;
  j["step"] = r.step;
  j["stage"] = r.stage;
  j["method"] = r.method;
  j["seed"] = r.seed;
  j["metrics"] = m;
  return j.dump();
}

MetricsRecord parse_metrics_line(const std::string& line) {
  const auto j = json::parse(line);
  if (!j.is_object() || j.value("v", 0) != kMetricsVersion) {
    throw std::invalid_argument("unsupported metrics record: " + line);
  }
  MetricsRecord r;
  r.event = j.at("event").get<std::string>();
  r.step = j.at("step").get<std::size_t>();
  r.stage = j.at("stage").get<std::size_t>();
  r.method = j.at("method").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& [k, v] : j.at("metrics").items()) r.metrics[k] = v.get<double>();
  return r;
}

std::vector<MetricsRecord> read_metrics(std::istream& in) {
  std::vector<MetricsRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_metrics_line(line));
  }
  return out;
}

std::vector<MetricsRecord> load_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics stream " + path.string());
  return read_metrics(in);
}

std::string metrics_csv(const std::vector<MetricsRecord>& records) {
  std::set<std::string> columns;
  for (const auto& r : records) {
    if (r.event != "eval") continue;
    for (const auto& [k, _] : r.metrics) columns.insert(k);
  }
  std::ostringstream out;
  out.precision(17);
  out << "method,seed,step,stage";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (const auto& r : records) {
    if (r.event != "eval") continue;
    out << r.method << ',' << r.seed << ',' << r.step << ',' << r.stage;
    for (const auto& c : columns) {
      out << ',';
      if (auto it = r.metrics.find(c); it != r.metrics.end()) out << it->second;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace poca
