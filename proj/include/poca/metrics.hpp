#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace poca {

inline constexpr int kMetricsVersion = 1;

/// One line of the metrics stream.
struct MetricsRecord {
  std::string event;  // "eval" or "stage"
  std::size_t step = 0;
  std::size_t stage = 0;
  std::string method;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;

  bool operator==(const MetricsRecord&) const = default;
};

std::string to_json_line(const MetricsRecord& record);
MetricsRecord parse_metrics_line(const std::string& line);
std::vector<MetricsRecord> read_metrics(std::istream& in);
std::vector<MetricsRecord> load_metrics(const std::filesystem::path& path);

/// Eval records as CSV: method,seed,step,stage,<metric columns>. Columns are
/// the sorted union of metric names; missing cells stay empty.
std::string metrics_csv(const std::vector<MetricsRecord>& records);

}  // namespace poca
