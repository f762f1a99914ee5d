// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infomin/encoder.hpp"
#include "infomin/tensor.hpp"

namespace infomin {

struct StsExample {
  std::string sentence_a;
  std::string sentence_b;
  double gold = 0.0;
};

struct ProbeExample {
  int label = 0;
  std::string sentence;
};

struct EvalReport {
  double spearman = 0.0;
  double alignment = 0.0;
  double uniformity = 0.0;
  std::optional<double> probe_accuracy;
};

/// Fractional ranks starting at 1; tied values share the mean of their rank span.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman's ρ: Pearson correlation of average ranks.  Throws
/// UndefinedStatisticError when either list is constant.
double spearman(std::span<const double> pred, std::span<const double> gold);

/// Row-wise cosine of paired embeddings followed by Spearman against gold.
double sts_score_embeddings(const EmbeddingMatrix& a, const EmbeddingMatrix& b, std::span<const double> gold);

/// Embeds both sides in test mode (no dropout, no projection head) and
/// returns Spearman between pair cosines and gold scores.
double sts_evaluate(const EncoderParams& params, std::span<const StsExample> dataset);

EmbeddingMatrix l2_normalize_rows(const EmbeddingMatrix& z);

/// Mean squared distance between paired unit-norm rows.
double alignment_metric(const PositivePairBatch& normalized_pairs);

/// log of the mean over ordered pairs i ≠ j of exp(−2‖zᵢ − zⱼ‖²).
double uniformity_metric(const EmbeddingMatrix& normalized);

/// Alignment and uniformity of dropout positive pairs of `sentences`
/// (projection-head outputs, L2-normalized).
std::pair<double, double> alignment_uniformity(const EncoderParams& params, std::span<const TokenSequence> sentences,
                                               std::uint64_t seed);

struct ProbeConfig {
  int iterations = 500;
  double l2 = 1e-4;
  double learning_rate = 0.5;
};

/// Multinomial logistic regression on frozen features.  Features are
/// standardized per column with the training mean and standard deviation
/// (constant columns are only centred); the same transform is applied at
/// prediction time.
class SoftmaxProbe {
 public:
  /// Full-batch gradient descent on mean cross-entropy + (l2/2)‖W‖².
  static SoftmaxProbe fit(const Tensor& features, std::span<const int> labels, int num_classes,
                          const ProbeConfig& cfg = {});

  /// Argmax class; ties resolve to the lowest class id.
  std::vector<int> predict(const Tensor& features) const;
  double accuracy(const Tensor& features, std::span<const int> labels) const;

  const Tensor& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }

 private:
  SoftmaxProbe(Tensor weights, std::vector<double> bias, std::vector<double> center, std::vector<double> inv_scale)
      : weights_(std::move(weights)),
        bias_(std::move(bias)),
        center_(std::move(center)),
        inv_scale_(std::move(inv_scale)) {}

  double feature(const Tensor& features, std::size_t row, std::size_t col) const {
    return (features.at(row, col) - center_[col]) * inv_scale_[col];
  }

  Tensor weights_;  // dim × classes
  std::vector<double> bias_;
  std::vector<double> center_;
  std::vector<double> inv_scale_;
};

/// Number of classes after checking labels cover 0..C−1 with C ≥ 2.
int validate_probe_labels(std::span<const int> labels);

double probe_train_eval(std::span<const ProbeExample> train, std::span<const ProbeExample> test,
                        const EncoderParams& params, const ProbeConfig& cfg = {});

}  // namespace infomin
