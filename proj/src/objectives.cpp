// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include "infomin/objectives.hpp"

#include <cmath>
#include <string>

#include "infomin/errors.hpp"

namespace infomin {

namespace {

void require_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be positive and finite, got " + std::to_string(temperature));
  }
}

void require_square(const Tensor& s, const char* op) {
  if (s.rank() != 2 || s.rows() != s.cols() || s.rows() == 0) {
    throw DimensionError(std::string(op) + ": similarity matrix must be square and non-empty, got " +
                         shape_to_string(s.shape()));
  }
}

void require_pair_shapes(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rank() != 2 || !a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": views must be equal-shape matrices, got " + shape_to_string(a.shape()) +
                         " and " + shape_to_string(b.shape()));
  }
}

Var normalized_rows(Var z, const char* which) {
  Var norms = row_l2norm(z);
  const Tensor& n = norms.value();
  for (std::size_t i = 0; i < n.numel(); ++i) {
    if (n[i] == 0.0) {
      throw DegenerateEmbeddingError(std::string("pairwise_cosine: row ") + std::to_string(i) + " of " + which +
                                     " has zero norm (collapsed encoder?)");
    }
  }
  return div_col(z, norms);
}

// Scaled similarities S/τ, shared by the loss and its decomposition.
Var scaled(Var similarity, double temperature) { return scale(similarity, 1.0 / temperature); }

// −(1/N) Σ_i log[ exp(S_ii/τ) / ((1/N) Σ_k exp(S_ik/τ)) ]
//   = (1/N) Σ_i log (1/N) Σ_k exp((S_ik − S_ii)/τ).
// Subtracting the positive before scaling keeps every term O(1) instead of
// cancelling two O(1/τ) sums.
Var contrast_from_similarity(Var similarity, double temperature) {
  return mean(log_mean_exp_rows(scaled(sub_col(similarity, diag(similarity)), temperature)));
}

}  // namespace

void ObjectiveConfig::validate() const {
  require_temperature(temperature);
  if (!(reconstruction_weight >= 0.0) || !std::isfinite(reconstruction_weight)) {
    throw ConfigError("reconstruction weight must be finite and >= 0");
  }
}

Var pairwise_cosine(Var z1, Var z2) {
  require_pair_shapes(z1.value(), z2.value(), "pairwise_cosine");
  Var u1 = normalized_rows(z1, "z1");
  Var u2 = normalized_rows(z2, "z2");
  return clamp(matmul(u1, transpose(u2)), -1.0, 1.0);
}

Var contrast_loss(Var similarity, double temperature) {
  require_temperature(temperature);
  require_square(similarity.value(), "contrast_loss");
  return contrast_from_similarity(similarity, temperature);
}

Var reconstruction_penalty(Var z1, Var z2) {
  require_pair_shapes(z1.value(), z2.value(), "reconstruction_penalty");
  const double n = static_cast<double>(z1.value().rows());
  Var diff = sub(z1, z2);
  return scale(sum(mul(diff, diff)), 1.0 / n);
}

TotalLossVars total_loss(Var z1, Var z2, const ObjectiveConfig& cfg) {
  cfg.validate();
  Var sim = pairwise_cosine(z1, z2);
  Var contrast = contrast_from_similarity(sim, cfg.temperature);
  const auto [align, unif] = decomposition(sim.value(), cfg.temperature);
  Var penalty = reconstruction_penalty(z1, z2);
  Var total = add(contrast, scale(penalty, cfg.reconstruction_weight));

  LossBreakdown b;
  b.contrast_loss = contrast.value().item();
  b.reconstruction_penalty = penalty.value().item();
  b.total = total.value().item();
  b.alignment_term = align;
  b.uniformity_term = unif;
  return {total, b};
}

SimilarityMatrix pairwise_cosine(const EmbeddingMatrix& z1, const EmbeddingMatrix& z2) {
  Tape tape(Tape::Recording::kOff);
  return pairwise_cosine(tape.constant(z1), tape.constant(z2)).value();
}

double contrast_loss(const SimilarityMatrix& similarity, double temperature) {
  Tape tape(Tape::Recording::kOff);
  return contrast_loss(tape.constant(similarity), temperature).value().item();
}

double reconstruction_penalty(const PositivePairBatch& pair) {
  Tape tape(Tape::Recording::kOff);
  return reconstruction_penalty(tape.constant(pair.z1), tape.constant(pair.z2)).value().item();
}

LossBreakdown total_loss(const EmbeddingMatrix& z1, const EmbeddingMatrix& z2, const ObjectiveConfig& cfg) {
  Tape tape(Tape::Recording::kOff);
  return total_loss(tape.constant(z1), tape.constant(z2), cfg).breakdown;
}

std::pair<double, double> decomposition(const SimilarityMatrix& similarity, double temperature) {
  require_temperature(temperature);
  require_square(similarity, "decomposition");
  Tape tape(Tape::Recording::kOff);
  Var logits = scaled(tape.constant(similarity), temperature);
  return {mean(diag(logits)).value().item(), mean(log_mean_exp_rows(logits)).value().item()};
}

}  // namespace infomin
