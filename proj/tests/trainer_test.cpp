// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "gradient_audit.hpp"
#include "infomin/adam.hpp"
#include "infomin/datasets.hpp"
#include "infomin/errors.hpp"
#include "infomin/trainer.hpp"
#include "oracles.hpp"

using namespace infomin;

namespace {

const SyntheticWorld& default_world() {
  static const SyntheticWorld world = SyntheticGenerator(SyntheticConfig{}).generate();
  return world;
}

const SyntheticWorld& small_world() {
  static const SyntheticWorld world = [] {
    SyntheticConfig c;
    c.seed = 7;
    c.corpus_size = 64;
    c.sts_size = 50;
    c.dev_size = 50;
    c.probe_train_size = 100;
    c.probe_test_size = 100;
    return SyntheticGenerator(c).generate();
  }();
  return world;
}

TrainConfig small_train_config() {
  TrainConfig c;
  c.encoder.embed_dim = 16;
  c.encoder.hidden_dim = 16;
  c.encoder.output_dim = 8;
  c.encoder.vocab_size = 512;
  c.batch_size = 16;
  c.epochs = 2;
  c.eval_interval = 3;
  return c;
}

bool same_trace(const std::vector<TraceRow>& a, const std::vector<TraceRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto &x = a[i].loss, &y = b[i].loss;
    if (a[i].step != b[i].step || x.total != y.total || x.contrast_loss != y.contrast_loss ||
        x.reconstruction_penalty != y.reconstruction_penalty || x.alignment_term != y.alignment_term ||
        x.uniformity_term != y.uniformity_term) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("adam leaves parameters alone under a zero gradient") {
  std::vector<Tensor> params{Tensor::matrix({{1.5, -2.0}}), Tensor::matrix({{0.25}})};
  const auto before = params;
  auto state = AdamState::for_params(params);
  const std::vector<Tensor> grads{Tensor::zeros({1, 2}), Tensor::zeros({1, 1})};
  adam_step(params, grads, state, 1e-3);
  CHECK(params == before);
  CHECK(state.step == 1);
}

TEST_CASE("adam first step on a scalar") {
  std::vector<Tensor> theta{Tensor::matrix({{0.0}})};
  auto state = AdamState::for_params(theta);
  adam_step(theta, std::vector<Tensor>{Tensor::matrix({{1.0}})}, state, 1e-3);
  CHECK(theta[0].item() == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-15));
  CHECK(state.m[0].item() == doctest::Approx(0.1));
  CHECK(state.v[0].item() == doctest::Approx(0.001));
}

TEST_CASE("adam two constant steps match the scalar oracle") {
  std::vector<Tensor> theta{Tensor::matrix({{0.0}})};
  auto state = AdamState::for_params(theta);
  oracle::ScalarAdam reference;
  double expected = 0.0;
  for (int i = 0; i < 2; ++i) {
    adam_step(theta, std::vector<Tensor>{Tensor::matrix({{1.0}})}, state, 1e-3);
    expected = reference.step(expected, 1.0, 1e-3);
  }
  CHECK(std::abs(theta[0].item() - expected) < 1e-15);
  CHECK(state.step == 2);
}

TEST_CASE("adam matches the scalar oracle on random sequences") {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> rate(1e-4, 1e-1);
  for (int sequence = 0; sequence < 10; ++sequence) {
    const double lr = rate(rng);
    std::vector<double> start(6);
    for (auto& x : start) x = u(rng);
    std::vector<Tensor> params{Tensor({2, 3}, start)};
    auto state = AdamState::for_params(params);
    std::vector<oracle::ScalarAdam> reference(6);
    auto expected = start;
    for (int step = 0; step < 5; ++step) {
      std::vector<double> g(6);
      for (auto& x : g) x = u(rng);
      adam_step(params, std::vector<Tensor>{Tensor({2, 3}, g)}, state, lr);
      for (std::size_t i = 0; i < 6; ++i) expected[i] = reference[i].step(expected[i], g[i], lr);
    }
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(params[0][i] - expected[i]) < 1e-12);
    for (double v : state.v[0].data()) CHECK(v >= 0.0);
  }
}

TEST_CASE("adam rejects mismatched inputs") {
  std::vector<Tensor> params{Tensor::zeros({2, 2})};
  auto state = AdamState::for_params(params);
  CHECK_THROWS_AS(adam_step(params, std::vector<Tensor>{Tensor::zeros({2, 3})}, state, 1e-3), DimensionError);
  CHECK_THROWS_AS(adam_step(params, std::vector<Tensor>{}, state, 1e-3), DimensionError);
  CHECK_THROWS(adam_step(params, std::vector<Tensor>{Tensor::zeros({2, 2})}, state, 0.0));
}

TEST_CASE("train config validation") {
  const auto& w = small_world();
  auto c = small_train_config();
  c.batch_size = 65;
  CHECK_THROWS_AS(train(w.corpus, w.dev, c), ConfigError);
  c = small_train_config();
  CHECK_THROWS_AS(train(w.corpus, std::vector<StsExample>{}, c), ConfigError);
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_train_config();
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_train_config();
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_train_config();
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("training is deterministic") {
  const auto& w = small_world();
  const auto c = small_train_config();
  const auto a = train(w.corpus, w.dev, c);
  const auto b = train(w.corpus, w.dev, c);
  CHECK(same_trace(a.trace, b.trace));
  CHECK(a.best.params == b.best.params);
  CHECK(a.best.dev_score == b.best.dev_score);
  CHECK(a.best.step == b.best.step);
  CHECK(a.final_params == b.final_params);

  auto other = c;
  other.seed = c.seed + 1;
  CHECK_FALSE(same_trace(a.trace, train(w.corpus, w.dev, other).trace));
}

TEST_CASE("trace covers every update and drops the ragged batch") {
  const auto& w = small_world();
  auto c = small_train_config();
  c.batch_size = 20;  // 64 / 20 = 3 full batches per epoch
  const auto r = train(w.corpus, w.dev, c);
  REQUIRE(r.trace.size() == 6);
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    CHECK(r.trace[i].step == i);
    const auto& l = r.trace[i].loss;
    CHECK(std::abs(l.total - (l.contrast_loss + c.lambda * l.reconstruction_penalty)) < 1e-12);
  }
  REQUIRE(r.dev_history.size() == 2);
  CHECK(r.dev_history[0].step == 3);
  CHECK(r.dev_history[1].step == 6);
}

TEST_CASE("fifty steps reduce the loss on a fixed batch") {
  const auto& w = small_world();
  REQUIRE(w.corpus.size() == 64);
  TrainConfig c;
  c.epochs = 25;  // 2 updates per epoch at batch 32
  const auto r = train(w.corpus, w.dev, c);
  REQUIRE(r.trace.size() == 50);

  const auto batch = tokenize_all(w.corpus, c.encoder.vocab_size);
  const auto before = make_positive_pair(batch, init_params(c.encoder_config(), c.seed), 99);
  const auto after = make_positive_pair(batch, r.final_params, 99);
  const double initial = total_loss(before.z1, before.z2, c.objective()).total;
  const double final = total_loss(after.z1, after.z2, c.objective()).total;
  CAPTURE(initial);
  CAPTURE(final);
  CHECK(final < initial);
}

TEST_CASE("checkpoint holds the best dev score") {
  const auto& w = small_world();
  const auto r = train(w.corpus, w.dev, small_train_config());
  REQUIRE_FALSE(r.dev_history.empty());
  const auto best = std::max_element(r.dev_history.begin(), r.dev_history.end(),
                                     [](const auto& a, const auto& b) { return a.spearman < b.spearman; });
  CHECK(r.best.dev_score == best->spearman);
  CHECK(r.best.step == best->step);  // max_element keeps the earliest maximum
  CHECK(sts_evaluate(r.best.params, w.dev) == r.best.dev_score);
}

TEST_CASE("a non-finite loss aborts with diagnostics") {
  const auto& w = small_world();
  auto c = small_train_config();
  c.learning_rate = 1e300;  // the first update overflows the next forward pass
  try {
    train(w.corpus, w.dev, c);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    const std::string what = e.what();
    CHECK(what.find("step 1 ") != std::string::npos);
    CHECK(what.find("lambda=0.4") != std::string::npos);
    CHECK(what.find("tau=0.05") != std::string::npos);
  }
}

TEST_CASE("reconstruction penalty shrinks on a held-out batch") {
  const auto& w = default_world();
  TrainConfig c;
  REQUIRE(c.lambda > 0.0);
  std::vector<std::string> held_out;
  for (std::size_t i = 0; i < c.batch_size; ++i) held_out.push_back(w.probe_test[i].sentence);
  const auto batch = tokenize_all(held_out, c.encoder.vocab_size);

  const auto r = train(w.corpus, w.dev, c);
  const double initial = reconstruction_penalty(make_positive_pair(batch, init_params(c.encoder_config(), c.seed), 5));
  const double final = reconstruction_penalty(make_positive_pair(batch, r.final_params, 5));
  CAPTURE(initial);
  CAPTURE(final);
  CHECK(final <= initial);
}

TEST_CASE("grid expansion order") {
  TrainConfig base;
  const auto configs = expand_grid(base, {{16, 32}, {1e-3}, {0.0, 0.4}});
  REQUIRE(configs.size() == 4);
  CHECK(configs[0].batch_size == 16);
  CHECK(configs[0].lambda == 0.0);
  CHECK(configs[1].lambda == 0.4);
  CHECK(configs[2].batch_size == 32);
  for (const auto& c : configs) CHECK(c.seed == base.seed);
  CHECK(expand_grid(base, {}).size() == 1);
}

TEST_CASE("singleton sweep equals a direct train call") {
  const auto& w = small_world();
  const auto c = small_train_config();
  const auto rows = sweep(w.corpus, w.dev, c, {{c.batch_size}, {c.learning_rate}, {c.lambda}});
  REQUIRE(rows.size() == 1);
  const auto direct = train(w.corpus, w.dev, c);
  CHECK(rows[0].run_id == 0);
  CHECK(same_trace(rows[0].result.trace, direct.trace));
  CHECK(rows[0].result.best.dev_score == direct.best.dev_score);
  CHECK(rows[0].result.best.params == direct.best.params);
}

TEST_CASE("sweep over lambda") {
  const auto& w = small_world();
  const auto c = small_train_config();
  const SweepGrid grid{{}, {}, {0.0, 0.4}};
  const auto rows = sweep(w.corpus, w.dev, c, grid);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(std::isfinite(row.result.best.dev_score));
    for (const auto& t : row.result.trace) CHECK(std::isfinite(t.loss.total));
  }
  CHECK(rows[0].result.best.dev_score >= rows[1].result.best.dev_score);
  std::vector<std::size_t> ids{rows[0].run_id, rows[1].run_id};
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::vector<std::size_t>{0, 1});

  const auto threaded = sweep(w.corpus, w.dev, c, grid, 2);
  REQUIRE(threaded.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(threaded[i].run_id == rows[i].run_id);
    CHECK(same_trace(threaded[i].result.trace, rows[i].result.trace));
    CHECK(threaded[i].result.best.params == rows[i].result.best.params);
  }
}

TEST_CASE("default sweep grid produces finite traces") {
  const auto& w = small_world();
  auto c = small_train_config();
  const auto rows = sweep(w.corpus, w.dev, c, {{16, 32}, {1e-3, 3e-3}, {0.0, 0.04, 0.4, 4.0}});
  CHECK(rows.size() == 16);
  for (const auto& row : rows) {
    for (const auto& t : row.result.trace) {
      CHECK(std::isfinite(t.loss.total));
      CHECK(std::isfinite(t.loss.contrast_loss));
      CHECK(std::isfinite(t.loss.reconstruction_penalty));
    }
  }
}

TEST_CASE("joint loss gradients with dropout pass the double-precision check") {
  const auto& w = default_world();
  TrainConfig c;
  const std::vector<std::string> sentences(w.corpus.begin(), w.corpus.begin() + 4);
  const auto batch = tokenize_all(sentences, c.encoder.vocab_size);
  const auto params = init_params(c.encoder_config(), c.seed);
  const auto r = check_joint_loss_gradients(params, batch, c.objective(), c.seed, 1e-5);
  CAPTURE(r.max_relative_error);
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("tiny joint loss gradients agree with quad-precision differences") {
  const auto& w = default_world();
  TrainConfig c;
  c.dropout = 0.0;
  const std::vector<std::string> sentences(w.corpus.begin(), w.corpus.begin() + 4);
  const auto batch = tokenize_all(sentences, c.encoder.vocab_size);
  const auto params = init_params(c.encoder_config(), c.seed);
  const auto audit = oracle::audit_joint_gradients(params, batch, c.objective(), c.seed, 40, 60, 11);
  CAPTURE(audit.worst.relative_error);
  CAPTURE(audit.smallest_gradient);
  CHECK(audit.smallest_gradient < 1e-9);  // below what double differences resolve
  CHECK(audit.worst.relative_error < 1e-6);
}
