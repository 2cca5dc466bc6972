#include "fixtures.hpp"
#include "poca/dataset.hpp"
#include "poca/trainer.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace {

std::vector<poca::Prompt> small_strings() {
  poca::StringDatasetSpec spec;
  spec.count = 8;
  spec.max_len = 4;
  spec.min_len = 4;
  return poca::make_string_dataset(spec);
}

poca::RunConfig small_config(poca::Method m) {
  poca::RunConfig c;
  c.method = m;
  c.max_len = 4;
  c.alphabet = "abcdefghijk";
  c.terminator = std::nullopt;
  c.group_size = 8;
  c.total_steps = 12;
  c.curriculum.total_steps = 12;
  c.curriculum.trim_fraction = 0.0;
  c.batch_size = 3;
  c.learning_rate = 1.0;
  c.eval_interval = 4;
  c.eval_samples = 4;
  c.seed = 5;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("poca_unit_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
  std::vector<int> hit(100, 0);
  poca::parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  try {
    poca::parallel_for(10, 3, [](std::size_t i) {
      if (i == 7 || i == 4) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "4");
  }
}

TEST_CASE("median and first threshold step") {
  CHECK(poca::median({3, 1, 2}) == 2.0);
  CHECK(poca::median({4, 1, 3, 2}) == 2.5);
  std::vector<poca::EvalReport> reports(3);
  for (std::size_t i = 0; i < 3; ++i) {
    reports[i].step = i * 10;
    reports[i].exact_match_rate = 0.3 * static_cast<double>(i);
  }
  CHECK(poca::first_step_reaching(reports, "exact_match", 0.5) == 20u);
  CHECK_FALSE(poca::first_step_reaching(reports, "exact_match", 0.7).has_value());
}

TEST_CASE("zero learning rate leaves the parameters untouched") {
  auto c = small_config(poca::Method::pareto);
  c.learning_rate = 0.0;
  const auto r = poca::train(c, small_strings(), small_strings());
  CHECK(r.policy.logits == c.initial_policy().logits);
  CHECK(r.checkpoint.step == 12);
}

TEST_CASE("zero steps emits only the initial snapshot") {
  auto c = small_config(poca::Method::poca);
  c.total_steps = 0;
  c.curriculum.total_steps = 0;
  const auto r = poca::train(c, small_strings(), small_strings());
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].event == "eval");
  CHECK(r.records[0].step == 0);
}

TEST_CASE("record counts: one per eval interval plus one per stage") {
  for (auto m : {poca::Method::weighted_sum, poca::Method::harmonic, poca::Method::pareto, poca::Method::nd_only,
                 poca::Method::fd_only, poca::Method::poca}) {
    const auto c = small_config(m);
    const auto r = poca::train(c, small_strings(), small_strings());
    std::size_t evals = 0, stages = 0;
    for (const auto& rec : r.records) (rec.event == "eval" ? evals : stages) += 1;
    CHECK(evals == 4);  // steps 0, 4, 8, 12
    CHECK(stages == (m == poca::Method::poca ? 3u : 0u));
    CHECK(r.policy.logits != c.initial_policy().logits);
  }
}

TEST_CASE("the observer sees consistent snapshots") {
  const auto c = small_config(poca::Method::pareto);
  std::size_t calls = 0;
  poca::PolicyParams last = c.initial_policy();
  poca::TrainOptions options;
  options.observer = [&](const poca::StepObservation& o) {
    CHECK(o.step == calls);
    CHECK(o.before->logits == last.logits);
    CHECK(o.batch->size() == 3);
    for (const auto& g : *o.groups) {
      CHECK(g.size() == 8);
      REQUIRE(g.partition.has_value());
      for (auto i : g.partition->neutral) CHECK(g.advantages[i] == 0.0);
    }
    last = *o.after;
    ++calls;
  };
  const auto r = poca::train(c, small_strings(), small_strings(), options);
  CHECK(calls == 12);
  CHECK(r.policy.logits == last.logits);
}

TEST_CASE("runs are identical across thread counts and update modes are distinct") {
  auto c = small_config(poca::Method::poca);
  const auto a = poca::train(c, small_strings(), small_strings());
  poca::TrainOptions o;
  o.threads = 3;
  const auto b = poca::train(c, small_strings(), small_strings(), o);
  CHECK(a.records == b.records);
  CHECK(a.policy.logits == b.policy.logits);
  c.update_mode = poca::UpdateMode::per_prompt;
  c.inner_updates = 2;
  const auto d = poca::train(c, small_strings(), small_strings(), o);
  CHECK(d.policy.logits != a.policy.logits);
  c.threads = 1;
  CHECK(poca::train(c, small_strings(), small_strings()).policy.logits == d.policy.logits);
}

TEST_CASE("resuming reproduces the uninterrupted run and its files") {
  const auto data = scratch("data.jsonl");
  poca::save_prompts(small_strings(), data);
  auto c = small_config(poca::Method::poca);
  c.dataset = data;
  c.checkpoint_interval = 5;

  const auto full_dir = scratch("full");
  c.output_dir = full_dir;
  const auto full = poca::train(c);
  for (std::size_t cut : {1u, 4u, 5u, 9u}) {
    c.output_dir = scratch("resumed");
    poca::TrainOptions first;
    first.stop_after = cut;
    const auto part = poca::train(c, first);
    CHECK(part.checkpoint.step == cut);
    poca::TrainOptions second;
    second.resume = poca::load_checkpoint(c.output_dir / "checkpoint.bin");
    const auto rest = poca::train(c, second);
    CHECK(rest.policy.logits == full.policy.logits);
    CHECK(rest.checkpoint == full.checkpoint);
    for (const char* f : {"metrics.jsonl", "difficulty.jsonl", "summary.csv", "checkpoint.bin"}) {
      CHECK_MESSAGE(slurp(c.output_dir / f) == slurp(full_dir / f), f);
    }
  }
  CHECK(std::filesystem::exists(full_dir / "checkpoint-5.bin"));
  std::filesystem::remove_all(full_dir);
  std::filesystem::remove_all(c.output_dir);
  std::filesystem::remove(data);
}

TEST_CASE("resume rejects mismatched checkpoints") {
  auto c = small_config(poca::Method::pareto);
  const auto r = poca::train(c, small_strings(), small_strings());
  poca::TrainOptions o;
  o.resume = r.checkpoint;
  o.resume->rng_seed = 99;
  CHECK_THROWS(poca::train(c, small_strings(), small_strings(), o));
  o.resume = r.checkpoint;
  o.resume->policy = poca::PolicyParams::sequence("ab", 4, 2);
  CHECK_THROWS(poca::train(c, small_strings(), small_strings(), o));
}

TEST_CASE("non-finite parameters abort with the step and prompt") {
  // Logits already at the edge of the double range overflow on the next update.
  auto c = small_config(poca::Method::weighted_sum);
  poca::TrainOptions first;
  first.stop_after = 2;
  auto ck = poca::train(c, small_strings(), small_strings(), first).checkpoint;
  std::fill(ck.policy.logits.begin(), ck.policy.logits.end(), std::numeric_limits<double>::max());
  c.learning_rate = std::numeric_limits<double>::max();
  poca::TrainOptions second;
  second.resume = ck;
  try {
    poca::train(c, small_strings(), small_strings(), second);
    FAIL("expected a training error");
  } catch (const poca::TrainingError& e) {
    CHECK(e.step == 2);
    CHECK(e.prompt_id.rfind("s", 0) == 0);
  }
}

TEST_CASE("comparing a config with itself") {
  const auto data = scratch("cmp.jsonl");
  poca::save_prompts(small_strings(), data);
  auto a = small_config(poca::Method::pareto);
  a.dataset = data;
  a.name = "first";
  auto b = a;
  b.name = "second";
  const auto report = poca::compare({a, b}, {1, 2}, {});
  CHECK(report.steps == std::vector<std::size_t>{0, 4, 8, 12});
  CHECK(report.median_series.at("first") == report.median_series.at("second"));
  CHECK(report.front_contribution.at("first") == doctest::Approx(0.5));
  CHECK(report.front_contribution.at("second") == doctest::Approx(0.5));
  CHECK(report.table_csv().find("first,") != std::string::npos);

  auto c = a;
  c.name = "other";
  c.env = poca::EnvKind::grid;
  CHECK_THROWS(poca::compare({a, c}, {1}, {}));
  auto d = a;
  CHECK_THROWS(poca::compare({a, d}, {1}, {}));
  std::filesystem::remove(data);
}
