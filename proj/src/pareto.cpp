#include "poca/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace poca {

namespace {

void require_finite(const RewardMatrix& rewards) {
  if (!rewards.allFinite()) throw std::invalid_argument("reward matrix contains non-finite entries");
}

bool rows_equal(const RewardMatrix& m, Eigen::Index i, Eigen::Index j) {
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if (m(i, k) != m(j, k)) return false;
  }
  return true;
}

}  // namespace

RewardMatrix to_matrix(const std::vector<RewardVector>& rows) {
  if (rows.empty()) return RewardMatrix(0, 0);
  const auto k = rows.front().size();
  RewardMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != k) throw DimensionError("reward vectors have different lengths");
    for (std::size_t j = 0; j < k; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dominates: vectors have different dimension");
  bool strictly = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return false;
    if (a[k] > b[k]) strictly = true;
  }
  return strictly;
}

IndexSet nd_set(const RewardMatrix& rewards) {
  if (rewards.rows() == 0) throw std::invalid_argument("nd_set: empty group");
  if (rewards.cols() == 0) throw DimensionError("nd_set: reward vectors must have K >= 1");
  require_finite(rewards);
  IndexSet front;
  const auto g = rewards.rows();
  for (Eigen::Index i = 0; i < g; ++i) {
    bool dominated = false;
    for (Eigen::Index j = 0; j < g && !dominated; ++j) {
      dominated = dominates(row_of(rewards, j), row_of(rewards, i));
    }
    if (!dominated) front.push_back(static_cast<std::size_t>(i));
  }
  return front;
}

IndexSet ParetoPartition::active() const {
  IndexSet out;
  std::set_union(positive.begin(), positive.end(), negative.begin(), negative.end(),
                 std::back_inserter(out));
  return out;
}

ParetoPartition bi_nd_set(const RewardMatrix& rewards) {
  ParetoPartition p;
  p.raw_nondominated = nd_set(rewards);
  const RewardMatrix negated = -rewards;
  p.raw_fully_dominated = nd_set(negated);

  p.positive = p.raw_nondominated;
  std::set_difference(p.raw_fully_dominated.begin(), p.raw_fully_dominated.end(),
                      p.raw_nondominated.begin(), p.raw_nondominated.end(),
                      std::back_inserter(p.negative));
  const auto active = p.active();
  for (std::size_t i = 0; i < static_cast<std::size_t>(rewards.rows()); ++i) {
    if (!std::binary_search(active.begin(), active.end(), i)) p.neutral.push_back(i);
  }
  return p;
}

std::pair<std::map<std::string, double>, std::size_t> global_front_credit(
    const std::vector<MethodSolutions>& solutions) {
  if (solutions.empty()) throw std::invalid_argument("global_front_contribution: no methods");

  Eigen::Index k = -1;
  Eigen::Index total = 0;
  for (const auto& s : solutions) {
    if (s.points.rows() == 0) continue;
    if (k < 0) k = s.points.cols();
    if (s.points.cols() != k) throw DimensionError("global_front_contribution: methods disagree on K");
    total += s.points.rows();
  }
  if (total == 0) throw std::invalid_argument("global_front_contribution: no solutions");

  RewardMatrix pooled(total, k);
  std::vector<const std::string*> owner;
  owner.reserve(static_cast<std::size_t>(total));
  Eigen::Index r = 0;
  for (const auto& s : solutions) {
    if (s.points.rows() == 0) continue;
    pooled.middleRows(r, s.points.rows()) = s.points;
    for (Eigen::Index i = 0; i < s.points.rows(); ++i) owner.push_back(&s.method);
    r += s.points.rows();
  }

  std::map<std::string, double> credit;
  for (const auto& s : solutions) credit[s.method] = 0.0;

  const IndexSet front = nd_set(pooled);
  std::vector<bool> done(front.size(), false);
  std::size_t distinct = 0;
  for (std::size_t a = 0; a < front.size(); ++a) {
    if (done[a]) continue;
    std::set<std::string> owners;
    for (std::size_t b = a; b < front.size(); ++b) {
      const auto ia = static_cast<Eigen::Index>(front[a]);
      const auto ib = static_cast<Eigen::Index>(front[b]);
      if (!done[b] && rows_equal(pooled, ia, ib)) {
        done[b] = true;
        owners.insert(*owner[front[b]]);
      }
    }
    ++distinct;
    for (const auto& m : owners) credit[m] += 1.0 / static_cast<double>(owners.size());
  }
  return {credit, distinct};
}

std::map<std::string, double> global_front_contribution(
    const std::vector<MethodSolutions>& solutions) {
  auto [credit, distinct] = global_front_credit(solutions);
  for (auto& [method, value] : credit) value /= static_cast<double>(distinct);
  return credit;
}

}  // namespace poca
