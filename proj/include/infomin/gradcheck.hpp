// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "infomin/tape.hpp"
#include "infomin/tensor.hpp"

namespace infomin {

/// Builds a scalar loss on `tape` from leaves bound to the parameters.
/// Must be deterministic: the same parameter values give the same loss.
using LossBuilder = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
};

/// Compares reverse-mode gradients with central differences
/// (f(θ+h) − f(θ−h)) / 2h.  The per-coordinate error is
/// |analytic − numeric| / (|analytic| + |numeric| + 1e-12) and the maximum
/// is reported.
///
/// `coordinates`, when given, restricts the sweep to the listed flat
/// indices of each parameter (one list per parameter).  Throws
/// NondeterminismError if two evaluations at the base point disagree.
GradCheckResult finite_difference_check(const LossBuilder& loss, std::vector<Tensor> params, double h,
                                        const std::optional<std::vector<std::vector<std::size_t>>>& coordinates = {});

}  // namespace infomin
