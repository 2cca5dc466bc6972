#include "fixtures.hpp"
#include "oracles.hpp"
#include "poca/grpo.hpp"
#include "poca/rewards.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using fixture::mat;
using poca::Aggregation;

namespace {

poca::SurrogateConfig cfg(Aggregation a) {
  poca::SurrogateConfig c;
  c.aggregation = a;
  return c;
}

// A group with hand-set rewards whose trajectories come from `policy`.
poca::Group group_with(const poca::PolicyParams& policy, const poca::Prompt& prompt, const poca::RewardMatrix& r,
                       std::uint64_t seed) {
  auto g = poca::sample_group(policy, prompt, static_cast<std::size_t>(r.rows()), {seed, poca::Stream::train, 0});
  g.rewards = r;
  return g;
}

}  // namespace

TEST_CASE("standardize examples") {
  const std::vector<double> a{1, 2, 3};
  const auto z = poca::standardize(a, 1e-8);
  CHECK(z[0] == doctest::Approx(-1.224744871391589));
  CHECK(z[1] == 0.0);
  CHECK(z[2] == doctest::Approx(1.224744871391589));
  CHECK(poca::standardize(std::vector<double>{5, 5, 5}, 1e-8) == std::vector<double>{0, 0, 0});
  CHECK(poca::standardize(std::vector<double>{0, 1}, 1e-8) == std::vector<double>{-1, 1});
  CHECK_THROWS(poca::standardize(std::vector<double>{1}, 1e-8));
}

TEST_CASE("aggregation modes") {
  const auto r1 = mat({{0.3}, {0.9}, {0.1}, {0.5}});
  const auto z = poca::standardize(std::vector<double>{0.3, 0.9, 0.1, 0.5}, 1e-8);
  for (auto a : {Aggregation::weighted_sum, Aggregation::harmonic}) {
    const auto adv = poca::aggregate_advantages(r1, cfg(a), nullptr).advantages;
    for (std::size_t i = 0; i < 4; ++i) CHECK(adv[i] == doctest::Approx(z[i]).epsilon(1e-12));
  }

  // Harmonic scalars before standardization: equal entries give that entry.
  const auto h = mat({{0.5, 0.5, 0.5}, {0.9, 0.6, 0.3}});
  const auto adv = poca::aggregate_advantages(h, cfg(Aggregation::harmonic), nullptr).advantages;
  const double s2 = 1.0 / ((1.0 / 3.0) * (1.0 / 0.9 + 1.0 / 0.6 + 1.0 / 0.3));
  CHECK(s2 == doctest::Approx(0.49091).epsilon(1e-5));
  CHECK(adv == poca::standardize(std::vector<double>{0.5, s2}, 1e-8));
  const auto zero = mat({{0.0, 0.5}, {0.4, 0.5}});
  CHECK(poca::aggregate_advantages(zero, cfg(Aggregation::harmonic), nullptr).clamped == 1);

  CHECK_THROWS(poca::aggregate_advantages(h, cfg(Aggregation::pareto_masked), nullptr));
}

TEST_CASE("masking zeroes neutral rows and rows outside the kept set") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    poca::RewardMatrix r(10, 3);
    for (int i = 0; i < 10; ++i) {
      for (int k = 0; k < 3; ++k) r(i, k) = std::round(u(gen) * 4.0) / 4.0;
    }
    const auto p = poca::bi_nd_set(r);
    const auto masked = poca::aggregate_advantages(r, cfg(Aggregation::pareto_masked), &p).advantages;
    for (auto i : p.neutral) CHECK(masked[i] == 0.0);
    const auto nd = poca::aggregate_advantages(r, cfg(Aggregation::nd_only), &p).advantages;
    const auto fd = poca::aggregate_advantages(r, cfg(Aggregation::fd_only), &p).advantages;
    for (std::size_t i = 0; i < 10; ++i) {
      if (!std::binary_search(p.raw_nondominated.begin(), p.raw_nondominated.end(), i)) CHECK(nd[i] == 0.0);
      if (!std::binary_search(p.raw_fully_dominated.begin(), p.raw_fully_dominated.end(), i)) CHECK(fd[i] == 0.0);
    }
    // Unmasked rows carry the mean of the per-column standardized rewards.
    for (auto i : p.active()) {
      double expect = 0.0;
      for (int k = 0; k < 3; ++k) {
        std::vector<double> col(10);
        for (int j = 0; j < 10; ++j) col[static_cast<std::size_t>(j)] = r(j, k);
        expect += poca::standardize(col, 1e-8)[i] / 3.0;
      }
      CHECK(masked[i] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("signed unit and scalarized Pareto advantages") {
  const auto r = mat({{0.9, 0.1}, {0.5, 0.5}, {0.1, 0.9}, {0.4, 0.4}, {0.45, 0.45}});
  const auto p = poca::bi_nd_set(r);
  auto c = cfg(Aggregation::pareto_masked);
  c.pareto_advantage = poca::ParetoAdvantage::signed_unit;
  CHECK(poca::aggregate_advantages(r, c, &p).advantages == std::vector<double>{1, 1, 1, -1, 0});
  c.pareto_advantage = poca::ParetoAdvantage::scalarized;
  const auto s = poca::aggregate_advantages(r, c, &p).advantages;
  const auto z = poca::standardize(std::vector<double>{1.0, 1.0, 1.0, 0.8, 0.9}, 1e-8);
  for (std::size_t i = 0; i < 4; ++i) CHECK(s[i] == doctest::Approx(z[i]).epsilon(1e-12));
  CHECK(s[4] == 0.0);
}

TEST_CASE("surrogate value examples") {
  auto policy = poca::PolicyParams::sequence("abc", 2, 1);
  const auto prompt = fixture::string_prompt("p", "ab", "ca", 2);
  auto g = group_with(policy, prompt, mat({{1}, {0}, {0.5}}), 1);
  auto c = cfg(Aggregation::weighted_sum);
  poca::prepare_group(g, c);
  const auto ones = poca::importance_ratios(g, policy);
  CHECK((ones.array() == 1.0).all());
  const double sum = std::accumulate(g.advantages.begin(), g.advantages.end(), 0.0);
  CHECK(poca::surrogate_value(g, ones, c) == doctest::Approx(sum / 3.0));

  // One active sample with A = 1 and every ratio at 1 + 2 eps takes the clip branch.
  auto m = cfg(Aggregation::pareto_masked);
  g.rewards = mat({{1}, {1}, {1}});
  poca::prepare_group(g, m);
  g.advantages = {1.0, 0.0, 0.0};
  g.partition->positive = {0};
  g.partition->negative = {};
  poca::RatioMatrix rho = poca::RatioMatrix::Constant(3, 2, 1.0 + 2.0 * m.clip_epsilon);
  CHECK(poca::surrogate_value(g, rho, m) == doctest::Approx(1.0 + m.clip_epsilon));

  g.advantages = {0.0, 0.0, 0.0};
  CHECK(poca::surrogate_value(g, rho, m) == 0.0);
  for (double x : poca::surrogate_gradient(g, policy, m)) CHECK(x == 0.0);

  rho(1, 0) = -1.0;
  g.advantages = {1.0, 1.0, 0.0};
  g.partition->positive = {0, 1};
  CHECK_THROWS(poca::surrogate_value(g, rho, m));
}

TEST_CASE("no clipping reduces to the ratio-weighted mean for nonnegative advantages") {
  auto policy = poca::PolicyParams::sequence("abcd", 3, 1);
  const auto prompt = fixture::string_prompt("p", "abc", "dab", 3);
  auto g = group_with(policy, prompt, mat({{0.2}, {0.7}, {0.4}, {0.9}}), 2);
  auto c = cfg(Aggregation::weighted_sum);
  c.clip_epsilon = 1e300;
  poca::prepare_group(g, c);
  for (double& a : g.advantages) a = std::abs(a);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  poca::RatioMatrix rho(4, 3);
  double expect = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int t = 0; t < 3; ++t) {
      rho(i, t) = u(gen);
      expect += rho(i, t) * g.advantages[static_cast<std::size_t>(i)] / 3.0;
    }
  }
  CHECK(poca::surrogate_value(g, rho, c) == doctest::Approx(expect / 4.0).epsilon(1e-12));
}

TEST_CASE("gradient at the sampling parameters is the score function") {
  auto policy = poca::PolicyParams::sequence("abc", 2, 1);
  const auto prompt = fixture::string_prompt("p", "ab", "ca", 2);
  auto g = group_with(policy, prompt, mat({{1}, {0}}), 5);
  auto c = cfg(Aggregation::weighted_sum);
  poca::prepare_group(g, c);
  const auto grad = poca::surrogate_gradient(g, policy, c);
  std::vector<double> expect(policy.logits.size(), 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto score = poca::log_prob_grad(policy, g.samples[i]);
    for (std::size_t j = 0; j < expect.size(); ++j) expect[j] += g.advantages[i] * score[j] / (2.0 * 2.0);
  }
  CHECK(oracle::relative_error(grad, expect) < 1e-14);
}

TEST_CASE("permuting a group permutes advantages and keeps the objective") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto policy = poca::PolicyParams::sequence("abcd", 3, 1);
  const auto prompt = fixture::string_prompt("p", "abc", "dab", 3);
  for (auto a : {Aggregation::weighted_sum, Aggregation::harmonic, Aggregation::pareto_masked, Aggregation::nd_only,
                 Aggregation::fd_only}) {
    poca::RewardMatrix r(6, 2);
    for (int i = 0; i < 6; ++i) r(i, 0) = u(gen), r(i, 1) = u(gen);
    auto g = group_with(policy, prompt, r, 7);
    const auto c = cfg(a);
    poca::prepare_group(g, c);
    std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
    poca::Group h = g;
    for (std::size_t i = 0; i < 6; ++i) {
      h.samples[i] = g.samples[perm[i]];
      h.rewards.row(static_cast<Eigen::Index>(i)) = g.rewards.row(static_cast<Eigen::Index>(perm[i]));
    }
    poca::prepare_group(h, c);
    for (std::size_t i = 0; i < 6; ++i) CHECK(h.advantages[i] == doctest::Approx(g.advantages[perm[i]]).epsilon(1e-12));
    poca::RatioMatrix rho(6, 3), rho_h(6, 3);
    for (int i = 0; i < 6; ++i) {
      for (int t = 0; t < 3; ++t) rho(i, t) = u(gen);
    }
    for (std::size_t i = 0; i < 6; ++i) rho_h.row(static_cast<Eigen::Index>(i)) = rho.row(static_cast<Eigen::Index>(perm[i]));
    CHECK(poca::surrogate_value(h, rho_h, c) == doctest::Approx(poca::surrogate_value(g, rho, c)).epsilon(1e-12));
  }
}

TEST_CASE("monotone column transforms keep the masked active set") {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    poca::RewardMatrix r(8, 3);
    for (int i = 0; i < 8; ++i) {
      for (int k = 0; k < 3; ++k) r(i, k) = u(gen);
    }
    poca::RewardMatrix t = r;
    t.col(1) = t.col(1) * 4.0;
    t.col(2).array() = t.col(2).array() * 0.5 + 3.0;
    CHECK(poca::bi_nd_set(r).active() == poca::bi_nd_set(t).active());
    std::vector<double> c1(8), c2(8);
    for (int i = 0; i < 8; ++i) c1[static_cast<std::size_t>(i)] = r(i, 1), c2[static_cast<std::size_t>(i)] = t(i, 1);
    const auto z1 = poca::standardize(c1, 1e-8), z2 = poca::standardize(c2, 1e-8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(z1[i] == doctest::Approx(z2[i]).epsilon(1e-12));
  }
}

TEST_CASE("conflict counting") {
  CHECK(poca::count_conflicts(mat({{1, 0}, {0, 1}}), 1e-8) == 2);
  CHECK(poca::count_conflicts(mat({{1, 1}, {0, 0}}), 1e-8) == 0);
  CHECK(poca::count_conflicts(mat({{1, 0.5}, {0, 0.5}, {0.5, 0.5}}), 1e-8) == 0);
  CHECK_THROWS(poca::count_conflicts(mat({{1}, {0}}), 1e-8));
}
