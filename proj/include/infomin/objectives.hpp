// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>

#include "infomin/encoder.hpp"
#include "infomin/tape.hpp"
#include "infomin/tensor.hpp"

namespace infomin {

/// N×N matrix of cosine similarities between first-view and second-view rows.
using SimilarityMatrix = Tensor;

struct ObjectiveConfig {
  double temperature = 0.05;
  double reconstruction_weight = 0.4;  // λ

  void validate() const;
};

/// Every quantity is oriented for minimization.
struct LossBreakdown {
  double contrast_loss = 0.0;           // negated InfoNCE
  double reconstruction_penalty = 0.0;  // mean ‖z¹ᵢ − z²ᵢ‖²
  double total = 0.0;                   // contrast_loss + λ·reconstruction_penalty
  double alignment_term = 0.0;          // (1/N) Σ S_ii / τ
  double uniformity_term = 0.0;         // (1/N) Σ_i log (1/N) Σ_k exp(S_ik / τ)
};

// Tape versions; gradients flow into z1/z2.
Var pairwise_cosine(Var z1, Var z2);
Var contrast_loss(Var similarity, double temperature);
Var reconstruction_penalty(Var z1, Var z2);

struct TotalLossVars {
  Var total;
  LossBreakdown breakdown;
};

TotalLossVars total_loss(Var z1, Var z2, const ObjectiveConfig& cfg);

// Pure versions.
SimilarityMatrix pairwise_cosine(const EmbeddingMatrix& z1, const EmbeddingMatrix& z2);
double contrast_loss(const SimilarityMatrix& similarity, double temperature);
double reconstruction_penalty(const PositivePairBatch& pair);
LossBreakdown total_loss(const EmbeddingMatrix& z1, const EmbeddingMatrix& z2, const ObjectiveConfig& cfg);

/// (alignment_term, uniformity_term); alignment_term − uniformity_term = −contrast_loss.
std::pair<double, double> decomposition(const SimilarityMatrix& similarity, double temperature);

}  // namespace infomin
