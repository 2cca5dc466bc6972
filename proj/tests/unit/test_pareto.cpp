#include "fixtures.hpp"
#include "oracles.hpp"
#include "poca/pareto.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using fixture::mat;
using poca::IndexSet;

namespace {

std::vector<double> v(std::initializer_list<double> x) { return x; }

poca::RewardMatrix random_group(std::mt19937_64& gen, int g, int k, bool coarse) {
  poca::RewardMatrix m(g, k);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> small(0, 2);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < k; ++j) m(i, j) = coarse ? small(gen) : u(gen);
  }
  return m;
}

}  // namespace

TEST_CASE("dominance examples") {
  CHECK(poca::dominates(v({1, 1}), v({0, 0})));
  CHECK_FALSE(poca::dominates(v({1, 0}), v({0, 1})));
  CHECK_FALSE(poca::dominates(v({0, 1}), v({1, 0})));
  CHECK_FALSE(poca::dominates(v({0.5, 0.5}), v({0.5, 0.5})));
  CHECK(poca::dominates(v({1, 0.5}), v({1, 0.4})));
  CHECK_THROWS_AS(poca::dominates(v({1, 2}), v({1})), poca::DimensionError);
}

TEST_CASE("dominance is irreflexive, antisymmetric and transitive") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto m = random_group(gen, 3, 1 + trial % 3, trial % 2 == 0);
    auto a = poca::row_of(m, 0), b = poca::row_of(m, 1), c = poca::row_of(m, 2);
    CHECK_FALSE(poca::dominates(a, a));
    CHECK_FALSE((poca::dominates(a, b) && poca::dominates(b, a)));
    if (poca::dominates(a, b) && poca::dominates(b, c)) CHECK(poca::dominates(a, c));
  }
}

TEST_CASE("nd_set examples") {
  CHECK(poca::nd_set(mat({{3}, {1}, {2}})) == IndexSet{0});
  CHECK(poca::nd_set(mat({{0.9, 0.1}, {0.5, 0.5}, {0.1, 0.9}, {0.4, 0.4}})) == IndexSet{0, 1, 2});
  CHECK(poca::nd_set(mat({{0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}})) == IndexSet{0, 1, 2});
  CHECK_THROWS(poca::nd_set(poca::RewardMatrix(0, 2)));
}

TEST_CASE("bi_nd_set examples") {
  const auto p = poca::bi_nd_set(mat({{0.9, 0.1}, {0.5, 0.5}, {0.1, 0.9}, {0.4, 0.4}}));
  CHECK(p.raw_nondominated == IndexSet{0, 1, 2});
  CHECK(p.raw_fully_dominated == IndexSet{0, 2, 3});
  CHECK(p.positive == IndexSet{0, 1, 2});
  CHECK(p.negative == IndexSet{3});
  CHECK(p.neutral.empty());

  const auto q = poca::bi_nd_set(mat({{3}, {1}, {2}}));
  CHECK(q.positive == IndexSet{0});
  CHECK(q.negative == IndexSet{1});
  CHECK(q.neutral == IndexSet{2});

  const auto tied = poca::bi_nd_set(mat({{1, 2}, {1, 2}, {1, 2}}));
  CHECK(tied.positive == IndexSet{0, 1, 2});
  CHECK(tied.negative.empty());
  CHECK(tied.neutral.empty());
}

TEST_CASE("partition matches the definitional oracle and covers the group") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int g = 1 + static_cast<int>(gen() % 24);
    const int k = 1 + static_cast<int>(gen() % 4);
    const auto m = random_group(gen, g, k, trial % 2 == 1);
    const auto p = poca::bi_nd_set(m);
    REQUIRE(p.raw_nondominated == oracle::nondominated(m));
    REQUIRE(p.raw_fully_dominated == oracle::nondominated(m, true));
    CHECK_FALSE(p.positive.empty());
    IndexSet all;
    all.insert(all.end(), p.positive.begin(), p.positive.end());
    all.insert(all.end(), p.negative.begin(), p.negative.end());
    all.insert(all.end(), p.neutral.begin(), p.neutral.end());
    std::sort(all.begin(), all.end());
    IndexSet expect(static_cast<std::size_t>(g));
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
    CHECK(std::includes(p.raw_fully_dominated.begin(), p.raw_fully_dominated.end(), p.negative.begin(), p.negative.end()));
  }
}

TEST_CASE("K=1 with distinct values resolves to argmax and argmin") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    poca::RewardMatrix m(8, 1);
    for (int i = 0; i < 8; ++i) m(i, 0) = u(gen);
    Eigen::Index hi, lo;
    m.col(0).maxCoeff(&hi);
    m.col(0).minCoeff(&lo);
    const auto p = poca::bi_nd_set(m);
    CHECK(p.positive == IndexSet{static_cast<std::size_t>(hi)});
    CHECK(p.negative == IndexSet{static_cast<std::size_t>(lo)});
  }
}

TEST_CASE("partition is unchanged by positive scaling and per-column shifts") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_group(gen, 12, 3, trial % 2 == 0);
    poca::RewardMatrix t = m * 3.5;
    for (int k = 0; k < 3; ++k) t.col(k).array() += 0.25 * k - 1.0;
    const auto a = poca::bi_nd_set(m), b = poca::bi_nd_set(t);
    CHECK(a.positive == b.positive);
    CHECK(a.negative == b.negative);
    CHECK(a.neutral == b.neutral);
  }
}

TEST_CASE("global front contribution") {
  using MS = poca::MethodSolutions;
  auto c = poca::global_front_contribution({MS{"A", mat({{0.9, 0.1}})}, MS{"B", mat({{0.1, 0.9}, {0.05, 0.05}})}});
  CHECK(c["A"] == doctest::Approx(0.5));
  CHECK(c["B"] == doctest::Approx(0.5));

  c = poca::global_front_contribution({MS{"A", mat({{0.2, 0.4}, {0.3, 0.1}})}});
  CHECK(c["A"] == 1.0);

  c = poca::global_front_contribution({MS{"A", mat({{1, 1}})}, MS{"B", mat({{0.5, 0.5}})}});
  CHECK(c["A"] == 1.0);
  CHECK(c["B"] == 0.0);

  // Identical front vectors from two methods split their unit of credit.
  c = poca::global_front_contribution({MS{"A", mat({{1, 0}, {0, 1}})}, MS{"B", mat({{0, 1}})}});
  CHECK(c["A"] == doctest::Approx(0.75));
  CHECK(c["B"] == doctest::Approx(0.25));

  CHECK_THROWS_AS(poca::global_front_contribution({MS{"A", mat({{1, 0}})}, MS{"B", mat({{1}})}}), poca::DimensionError);
}

TEST_CASE("front fractions are nonnegative and sum to one") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<poca::MethodSolutions> s;
    for (int m = 0; m < 3; ++m) s.push_back({"m" + std::to_string(m), random_group(gen, 1 + static_cast<int>(gen() % 10), 2, trial % 2 == 0)});
    double sum = 0.0;
    for (const auto& [_, f] : poca::global_front_contribution(s)) {
      CHECK(f >= 0.0);
      sum += f;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}
