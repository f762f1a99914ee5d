// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include "infomin/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "infomin/errors.hpp"

namespace infomin {

namespace {

constexpr double kUnitNormTolerance = 1e-9;

void require_unit_rows(const Tensor& z, const char* what) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double ss = 0.0;
    for (double x : z.row(i)) ss += x * x;
    if (std::abs(std::sqrt(ss) - 1.0) > kUnitNormTolerance) {
      throw InputError(std::string(what) + ": row " + std::to_string(i) + " is not unit-norm (norm " +
                       std::to_string(std::sqrt(ss)) + ")");
    }
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

bool is_constant(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("pearson: length mismatch " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatisticError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) {
    throw DimensionError("spearman: length mismatch " + std::to_string(pred.size()) + " vs " +
                         std::to_string(gold.size()));
  }
  if (pred.size() < 2) throw UndefinedStatisticError("spearman: need at least two observations");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred[i]) || !std::isfinite(gold[i])) throw NumericError("spearman: non-finite input");
  }
  if (is_constant(pred)) throw UndefinedStatisticError("spearman: predictions are constant");
  if (is_constant(gold)) throw UndefinedStatisticError("spearman: gold scores are constant");
  const auto rp = average_ranks(pred);
  const auto rg = average_ranks(gold);
  return pearson(rp, rg);
}

double sts_score_embeddings(const EmbeddingMatrix& a, const EmbeddingMatrix& b, std::span<const double> gold) {
  if (!a.same_shape(b) || a.rank() != 2 || a.rows() != gold.size()) {
    throw DimensionError("sts_score_embeddings: shapes " + shape_to_string(a.shape()) + ", " +
                         shape_to_string(b.shape()) + " do not match " + std::to_string(gold.size()) + " pairs");
  }
  std::vector<double> scores(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double na = norm(a.row(i)), nb = norm(b.row(i));
    if (na == 0.0 || nb == 0.0) {
      throw DegenerateEmbeddingError("sts: zero-norm embedding for pair " + std::to_string(i) + " sentence " +
                                     (na == 0.0 ? "a" : "b"));
    }
    // 1 − ‖â − b̂‖²/2: identical embeddings score exactly 1.
    double dist = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double diff = a.at(i, k) / na - b.at(i, k) / nb;
      dist += diff * diff;
    }
    scores[i] = 1.0 - 0.5 * dist;
  }
  return spearman(scores, gold);
}

double sts_evaluate(const EncoderParams& params, std::span<const StsExample> dataset) {
  if (dataset.empty()) throw InputError("sts_evaluate: dataset is empty");
  std::vector<TokenSequence> left, right;
  std::vector<double> gold;
  left.reserve(dataset.size());
  right.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& ex = dataset[i];
    try {
      left.push_back(tokenize(ex.sentence_a, params.config.vocab_size));
      right.push_back(tokenize(ex.sentence_b, params.config.vocab_size));
    } catch (const InputError& e) {
      throw InputError("sts pair " + std::to_string(i) + ": " + e.what());
    }
    gold.push_back(ex.gold);
  }
  return sts_score_embeddings(embed(left, params), embed(right, params), gold);
}

EmbeddingMatrix l2_normalize_rows(const EmbeddingMatrix& z) {
  Tensor out = z;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const double n = norm(z.row(i));
    if (n == 0.0) throw DegenerateEmbeddingError("l2_normalize_rows: row " + std::to_string(i) + " has zero norm");
    for (double& x : out.row(i)) x /= n;
  }
  return out;
}

double alignment_metric(const PositivePairBatch& normalized_pairs) {
  const auto& z1 = normalized_pairs.z1;
  const auto& z2 = normalized_pairs.z2;
  if (z1.rank() != 2 || !z1.same_shape(z2) || z1.rows() == 0) {
    throw DimensionError("alignment_metric: views must be equal-shape non-empty matrices");
  }
  require_unit_rows(z1, "alignment_metric z1");
  require_unit_rows(z2, "alignment_metric z2");
  double s = 0.0;
  for (std::size_t i = 0; i < z1.rows(); ++i) s += squared_distance(z1.row(i), z2.row(i));
  return s / static_cast<double>(z1.rows());
}

double uniformity_metric(const EmbeddingMatrix& normalized) {
  if (normalized.rank() != 2 || normalized.rows() < 2) {
    throw InputError("uniformity_metric: need at least two embeddings");
  }
  require_unit_rows(normalized, "uniformity_metric");
  const std::size_t n = normalized.rows();
  std::vector<double> exponents;
  exponents.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) exponents.push_back(-2.0 * squared_distance(normalized.row(i), normalized.row(j)));
  const double mx = *std::max_element(exponents.begin(), exponents.end());
  double s = 0.0;
  for (double e : exponents) s += std::exp(e - mx);
  return mx + std::log(s / static_cast<double>(exponents.size()));
}

std::pair<double, double> alignment_uniformity(const EncoderParams& params, std::span<const TokenSequence> sentences,
                                               std::uint64_t seed) {
  const auto pair = make_positive_pair(sentences, params, seed);
  PositivePairBatch unit{l2_normalize_rows(pair.z1), l2_normalize_rows(pair.z2)};
  return {alignment_metric(unit), uniformity_metric(unit.z1)};
}

int validate_probe_labels(std::span<const int> labels) {
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw InputError("probe: training labels contain fewer than two classes");
  if (*distinct.begin() != 0 || *distinct.rbegin() != static_cast<int>(distinct.size()) - 1) {
    throw InputError("probe: labels must form the contiguous range 0..C-1");
  }
  return static_cast<int>(distinct.size());
}

SoftmaxProbe SoftmaxProbe::fit(const Tensor& features, std::span<const int> labels, int num_classes,
                               const ProbeConfig& cfg) {
  if (features.rank() != 2 || features.rows() != labels.size() || labels.empty()) {
    throw DimensionError("probe: feature rows must match label count");
  }
  if (num_classes < 2) throw InputError("probe: need at least two classes");
  if (cfg.iterations < 0 || !(cfg.learning_rate > 0.0) || !(cfg.l2 >= 0.0)) throw ConfigError("probe: invalid config");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw InputError("probe: label " + std::to_string(y) + " out of range");
  }

  const std::size_t n = features.rows(), d = features.cols(), c = static_cast<std::size_t>(num_classes);
  std::vector<double> center(d, 0.0), inv_scale(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += features.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (features.at(i, j) - mean) * (features.at(i, j) - mean);
    var /= static_cast<double>(n);
    center[j] = mean;
    if (var > 0.0) inv_scale[j] = 1.0 / std::sqrt(var);
  }
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] = (features.at(i, j) - center[j]) * inv_scale[j];

  std::vector<double> w(d * c, 0.0), b(c, 0.0);
  std::vector<double> probs(n * c), gw(d * c), gb(c);
  const double inv_n = 1.0 / static_cast<double>(n);

  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double* p = probs.data() + i * c;
      for (std::size_t k = 0; k < c; ++k) {
        double z = b[k];
        for (std::size_t j = 0; j < d; ++j) z += x[i * d + j] * w[j * c + k];
        p[k] = z;
      }
      const double mx = *std::max_element(p, p + c);
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) s += (p[k] = std::exp(p[k] - mx));
      for (std::size_t k = 0; k < c; ++k) p[k] /= s;
      p[labels[i]] -= 1.0;  // dL/dz = softmax − onehot
    }
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < c; ++k) gw[j * c + k] = cfg.l2 * w[j * c + k];
    for (std::size_t i = 0; i < n; ++i) {
      const double* g = probs.data() + i * c;
      for (std::size_t k = 0; k < c; ++k) gb[k] += g[k] * inv_n;
      for (std::size_t j = 0; j < d; ++j) {
        const double xs = x[i * d + j] * inv_n;
        for (std::size_t k = 0; k < c; ++k) gw[j * c + k] += xs * g[k];
      }
    }
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= cfg.learning_rate * gw[k];
    for (std::size_t k = 0; k < c; ++k) b[k] -= cfg.learning_rate * gb[k];
  }
  return SoftmaxProbe(Tensor({d, c}, std::move(w)), std::move(b), std::move(center), std::move(inv_scale));
}

std::vector<int> SoftmaxProbe::predict(const Tensor& features) const {
  const std::size_t d = weights_.rows(), c = weights_.cols();
  if (features.rank() != 2 || features.cols() != d) {
    throw DimensionError("probe: expected features with " + std::to_string(d) + " columns, got " +
                         shape_to_string(features.shape()));
  }
  std::vector<int> out(features.rows());
  std::vector<double> logits(c);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t k = 0; k < c; ++k) {
      double z = bias_[k];
      for (std::size_t j = 0; j < d; ++j) z += feature(features, i, j) * weights_.at(j, k);
      logits[k] = z;
    }
    // max_element returns the first maximum: ties go to the lowest id.
    out[i] = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  }
  return out;
}

double SoftmaxProbe::accuracy(const Tensor& features, std::span<const int> labels) const {
  const auto pred = predict(features);
  if (pred.size() != labels.size() || pred.empty()) throw DimensionError("probe: label count mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double probe_train_eval(std::span<const ProbeExample> train, std::span<const ProbeExample> test,
                        const EncoderParams& params, const ProbeConfig& cfg) {
  if (train.empty() || test.empty()) throw InputError("probe: train and test sets must be non-empty");
  auto split = [&](std::span<const ProbeExample> set, std::vector<int>& labels) {
    std::vector<TokenSequence> seqs;
    for (std::size_t i = 0; i < set.size(); ++i) {
      try {
        seqs.push_back(tokenize(set[i].sentence, params.config.vocab_size));
      } catch (const InputError& e) {
        throw InputError("probe example " + std::to_string(i) + ": " + e.what());
      }
      labels.push_back(set[i].label);
    }
    return embed(seqs, params);
  };
  std::vector<int> train_labels, test_labels;
  const Tensor train_x = split(train, train_labels);
  const Tensor test_x = split(test, test_labels);
  const int classes = validate_probe_labels(train_labels);
  for (int y : test_labels) {
    if (y < 0 || y >= classes) throw InputError("probe: test label " + std::to_string(y) + " unseen in training");
  }
  return SoftmaxProbe::fit(train_x, train_labels, classes, cfg).accuracy(test_x, test_labels);
}

}  // namespace infomin
