// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "infomin/datasets.hpp"
#include "infomin/errors.hpp"
#include "infomin/evaluation.hpp"
#include "oracles.hpp"

using namespace infomin;

namespace {

Tensor to_tensor(const oracle::Matrix& m) {
  std::vector<double> data;
  for (const auto& r : m) data.insert(data.end(), r.begin(), r.end());
  return Tensor({m.size(), m.front().size()}, std::move(data));
}

oracle::Matrix rows_of(const Tensor& t) {
  oracle::Matrix m(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) m[i].assign(t.row(i).begin(), t.row(i).end());
  return m;
}

EncoderConfig small_encoder() {
  EncoderConfig c;
  c.vocab_size = 256;
  c.embed_dim = 16;
  c.hidden_dim = 16;
  c.hidden_layers = 1;
  c.output_dim = 8;
  return c;
}

std::vector<std::string> word_salad(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> words{"red",  "blue", "cat",  "dog",  "runs", "sleeps", "near", "far",
                                              "tree", "lake", "sun",  "moon", "old",  "young",  "big",  "small"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    const auto len = 2 + rng() % 5;
    for (std::size_t k = 0; k < len; ++k) s += (k ? " " : "") + words[rng() % words.size()];
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("spearman examples") {
  const std::vector<double> a{1, 2, 3};
  CHECK(spearman(a, std::vector<double>{10, 20, 30}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spearman(a, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-15));
  // Average ranks [1, 2.5, 2.5, 4] vs [1, 3, 2, 4]; frozen from the exhaustive oracle.
  const std::vector<double> x{1, 2, 2, 3}, y{1, 3, 2, 4};
  CHECK(oracle::spearman(x, y) == doctest::Approx(0.9486832980505138).epsilon(1e-15));
  CHECK(spearman(x, y) == doctest::Approx(0.9486832980505138).epsilon(1e-14));
}

TEST_CASE("spearman error paths") {
  const std::vector<double> a{1, 2, 3};
  CHECK_THROWS_AS(spearman(a, std::vector<double>{1, 2}), DimensionError);
  CHECK_THROWS_AS(spearman(a, std::vector<double>{5, 5, 5}), UndefinedStatisticError);
  CHECK_THROWS_AS(spearman(std::vector<double>{2, 2, 2}, a), UndefinedStatisticError);
  CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}), UndefinedStatisticError);
}

TEST_CASE("average ranks share tied spans") {
  const std::vector<double> v{10, 20, 20, 5, 20};
  CHECK(average_ranks(v) == std::vector<double>{2, 4, 4, 1, 4});
}

TEST_CASE("spearman matches the exhaustive oracle, ties included") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> small(0, 4);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 12);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = small(rng);
      y[i] = (t % 2) ? small(rng) : std::uniform_real_distribution<double>(-1, 1)(rng);
    }
    const bool defined = std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) != x.end() &&
                         std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) != y.end();
    if (!defined) {
      CHECK_THROWS_AS(spearman(x, y), UndefinedStatisticError);
      continue;
    }
    CHECK(std::abs(spearman(x, y) - oracle::spearman(x, y)) < 1e-10);
  }
}

TEST_CASE("spearman properties") {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(20), b(20);
    for (auto& v : a) v = g(rng);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = a[i] + g(rng);
    const double rho = spearman(a, b);
    CHECK(rho >= -1.0);
    CHECK(rho <= 1.0);
    CHECK(spearman(b, a) == rho);
    auto cubed = a;
    for (auto& v : cubed) v = v * v * v + 7.0;
    CHECK(spearman(cubed, b) == doctest::Approx(rho).epsilon(1e-14));
  }
}

TEST_CASE("alignment metric") {
  const auto u = Tensor::matrix({{1, 0}, {0.6, 0.8}});
  CHECK(alignment_metric({u, u}) == 0.0);
  CHECK(alignment_metric({Tensor::matrix({{1, 0}}), Tensor::matrix({{0, 1}})}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(alignment_metric({Tensor::matrix({{2, 0}}), Tensor::matrix({{1, 0}})}), InputError);
  CHECK_THROWS_AS(alignment_metric({Tensor::matrix({{1, 0}}), Tensor::matrix({{1, 0}, {0, 1}})}), DimensionError);
}

TEST_CASE("uniformity metric") {
  CHECK(uniformity_metric(Tensor::matrix({{0, 1}, {0, 1}, {0, 1}})) == 0.0);
  CHECK(uniformity_metric(Tensor::matrix({{1, 0}, {-1, 0}})) == doctest::Approx(-8.0).epsilon(1e-15));
  CHECK_THROWS_AS(uniformity_metric(Tensor::matrix({{1, 0}})), InputError);
  CHECK_THROWS_AS(uniformity_metric(Tensor::matrix({{1, 0}, {0, 3}})), InputError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  oracle::Matrix circle;
  for (int i = 0; i < 100; ++i) {
    const double a = angle(rng);
    circle.push_back({std::cos(a), std::sin(a)});
  }
  CHECK(std::abs(uniformity_metric(to_tensor(circle)) - oracle::uniformity(circle)) < 1e-10);
}

TEST_CASE("metrics agree with double-loop oracles") {
  std::mt19937_64 rng(404);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 7, d = 1 + rng() % 8;
    const auto u1 = oracle::normalized(oracle::random_matrix(rng, n, d));
    const auto u2 = oracle::normalized(oracle::random_matrix(rng, n, d));
    CHECK(std::abs(alignment_metric({to_tensor(u1), to_tensor(u2)}) - oracle::alignment(u1, u2)) < 1e-10);
    const double uni = uniformity_metric(to_tensor(u1));
    CHECK(std::abs(uni - oracle::uniformity(u1)) < 1e-10);
    CHECK(uni <= 0.0);
  }
}

TEST_CASE("l2_normalize_rows") {
  const auto u = l2_normalize_rows(Tensor::matrix({{3, 4}, {0, -2}}));
  CHECK(u == Tensor::matrix({{0.6, 0.8}, {0, -1}}));
  CHECK_THROWS_AS(l2_normalize_rows(Tensor::matrix({{0, 0}})), DegenerateEmbeddingError);
}

TEST_CASE("sts_evaluate on identical sentences surfaces the constant-score error") {
  const auto p = init_params(small_encoder(), 1);
  std::vector<StsExample> ds;
  for (int i = 0; i < 6; ++i) {
    const std::string s = "same words " + std::to_string(i);
    ds.push_back({s, s, static_cast<double>(i)});
  }
  CHECK_THROWS_AS(sts_evaluate(p, ds), UndefinedStatisticError);
}

TEST_CASE("sts_evaluate recovers golds built from its own cosines") {
  std::mt19937_64 rng(55);
  const auto p = init_params(small_encoder(), 2);
  const auto a = word_salad(rng, 40), b = word_salad(rng, 40);
  const auto ea = rows_of(embed(tokenize_all(a, 256), p));
  const auto eb = rows_of(embed(tokenize_all(b, 256), p));
  std::vector<StsExample> ds;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ds.push_back({a[i], b[i], oracle::dot(ea[i], eb[i]) / (oracle::norm(ea[i]) * oracle::norm(eb[i]))});
  }
  CHECK(sts_evaluate(p, ds) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random encoder against random golds stays near zero") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    const auto p = init_params(small_encoder(), seed);
    const auto a = word_salad(rng, 100), b = word_salad(rng, 100);
    std::vector<StsExample> ds;
    std::uniform_real_distribution<double> gold(0.0, 5.0);
    for (std::size_t i = 0; i < a.size(); ++i) ds.push_back({a[i], b[i], gold(rng)});
    CHECK(std::abs(sts_evaluate(p, ds)) < 0.3);
  }
}

TEST_CASE("sts scoring ignores a uniform embedding scale") {
  std::mt19937_64 rng(66);
  const auto a = oracle::random_matrix(rng, 30, 5), b = oracle::random_matrix(rng, 30, 5);
  std::vector<double> gold(30);
  for (auto& g : gold) g = std::uniform_real_distribution<double>(0, 5)(rng);
  const double base = sts_score_embeddings(to_tensor(a), to_tensor(b), gold);
  for (double factor : {4.0, 3.7, 0.01}) {
    auto sa = a, sb = b;
    for (auto& r : sa)
      for (auto& v : r) v *= factor;
    for (auto& r : sb)
      for (auto& v : r) v *= factor;
    CHECK(sts_score_embeddings(to_tensor(sa), to_tensor(sb), gold) == base);
  }
}

TEST_CASE("alignment and uniformity of dropout pairs") {
  std::mt19937_64 rng(3);
  auto cfg = small_encoder();
  cfg.dropout = 0.1;
  const auto p = init_params(cfg, 4);
  const auto seqs = tokenize_all(word_salad(rng, 20), cfg.vocab_size);
  const auto [align, uni] = alignment_uniformity(p, seqs, 11);
  CHECK(align > 0.0);
  CHECK(uni <= 0.0);
  CHECK(alignment_uniformity(p, seqs, 11) == std::pair{align, uni});

  cfg.dropout = 0.0;
  auto p0 = p;
  p0.config = cfg;
  CHECK(alignment_uniformity(p0, seqs, 11).first == 0.0);
}

TEST_CASE("softmax probe separates Gaussian clusters") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<double> data;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    const int y = i % 2;
    const double cx = y ? 2.0 : -2.0;
    data.insert(data.end(), {cx + noise(rng), noise(rng), noise(rng)});
    labels.push_back(y);
  }
  const Tensor x({100, 3}, data);
  const auto probe = SoftmaxProbe::fit(x, labels, 2);
  CHECK(probe.accuracy(x, labels) == 1.0);
}

TEST_CASE("an untrained probe predicts the lowest class id") {
  const Tensor x = Tensor::matrix({{1, 2}, {-3, 0}, {0.5, 0.5}, {9, -9}});
  const std::vector<int> labels{0, 1, 2, 1};
  const auto probe = SoftmaxProbe::fit(x, labels, 3, {0, 1e-4, 0.5});
  CHECK(probe.predict(x) == std::vector<int>{0, 0, 0, 0});
  CHECK(probe.accuracy(x, labels) == 0.25);
}

TEST_CASE("probe label validation") {
  CHECK(validate_probe_labels(std::vector<int>{0, 1, 1, 2}) == 3);
  CHECK_THROWS_AS(validate_probe_labels(std::vector<int>{1, 1, 1}), InputError);
  CHECK_THROWS_AS(validate_probe_labels(std::vector<int>{0, 2}), InputError);
  CHECK_THROWS_AS(validate_probe_labels(std::vector<int>{-1, 0}), InputError);
  const Tensor x = Tensor::matrix({{1}, {2}});
  CHECK_THROWS_AS(SoftmaxProbe::fit(x, std::vector<int>{0, 0}, 1), InputError);
}

TEST_CASE("probe accuracy on shuffled labels is chance") {
  const auto world = SyntheticGenerator(SyntheticConfig{}).generate();
  EncoderConfig cfg;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> labels(200);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
    std::shuffle(labels.begin(), labels.end(), rng);
    std::vector<ProbeExample> train, test;
    for (std::size_t i = 0; i < 200; ++i) {
      (i < 100 ? train : test).push_back({labels[i], world.probe_train[i].sentence});
    }
    const double acc = probe_train_eval(train, test, init_params(cfg, seed));
    CHECK(acc >= 0.35);
    CHECK(acc <= 0.65);
  }
}

TEST_CASE("probe accuracy survives relabeling the classes") {
  const auto world = SyntheticGenerator(SyntheticConfig{}).generate();
  const auto p = init_params(EncoderConfig{}, 42);
  const std::vector<ProbeExample> train(world.probe_train.begin(), world.probe_train.begin() + 200);
  const std::vector<ProbeExample> test(world.probe_test.begin(), world.probe_test.begin() + 100);
  const double base = probe_train_eval(train, test, p);
  CHECK(base > 0.5);  // topics are linearly recoverable even from a random encoder

  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::rotate(perm.begin(), perm.begin() + 3, perm.end());
  auto relabel = [&](std::vector<ProbeExample> v) {
    for (auto& ex : v) ex.label = perm[static_cast<std::size_t>(ex.label)];
    return v;
  };
  CHECK(probe_train_eval(relabel(train), relabel(test), p) == base);
}
