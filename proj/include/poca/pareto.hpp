#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace poca {

// G x K, one row per sample, one column per reward objective.
using RewardMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RewardVector = std::vector<double>;
using IndexSet = std::vector<std::size_t>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::span<const double> row_of(const RewardMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

RewardMatrix to_matrix(const std::vector<RewardVector>& rows);

/// Strict Pareto dominance: a >= b everywhere and a > b somewhere.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Indices not strictly dominated by any other row, ascending. Duplicate
/// rows never dominate each other, so ties on the front are all kept.
IndexSet nd_set(const RewardMatrix& rewards);

struct ParetoPartition {
  IndexSet positive;
  IndexSet negative;
  IndexSet neutral;
  IndexSet raw_nondominated;
  IndexSet raw_fully_dominated;

  // positive ∪ negative, ascending.
  IndexSet active() const;
};

/// Bi-directional sort. raw_fully_dominated is the non-dominated set of the
/// negated rewards. Rows in both raw sets resolve to positive.
ParetoPartition bi_nd_set(const RewardMatrix& rewards);

struct MethodSolutions {
  std::string method;
  RewardMatrix points;
};

/// Unnormalized credit per method for the pooled non-dominated front. Each
/// distinct front vector is worth one unit, split equally among the methods
/// that produced it. The second member is the number of distinct front vectors.
std::pair<std::map<std::string, double>, std::size_t> global_front_credit(
    const std::vector<MethodSolutions>& solutions);

/// Fraction of the pooled front contributed by each method; sums to 1.
std::map<std::string, double> global_front_contribution(
    const std::vector<MethodSolutions>& solutions);

}  // namespace poca
