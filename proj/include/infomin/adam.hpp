// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "infomin/tensor.hpp"

namespace infomin {

/// First/second moment estimates, one pair per parameter tensor.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  /// Zero moments shaped like `params`.
  static AdamState for_params(std::span<const Tensor> params);
};

/// One bias-corrected Adam update, in place:
///   m ← β₁m + (1−β₁)g,  v ← β₂v + (1−β₂)g²
///   θ ← θ − lr · m̂ / (√v̂ + ε),  m̂ = m/(1−β₁ᵗ), v̂ = v/(1−β₂ᵗ)
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state, double learning_rate);

}  // namespace infomin
