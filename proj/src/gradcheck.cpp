// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include "infomin/gradcheck.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "infomin/errors.hpp"

namespace infomin {

namespace {

double evaluate(const LossBuilder& loss, const std::vector<Tensor>& params) {
  Tape tape(Tape::Recording::kOff);
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) leaves.push_back(tape.leaf(p));
  const Var out = loss(tape, leaves);
  return out.value().item();
}

}  // namespace

GradCheckResult finite_difference_check(const LossBuilder& loss, std::vector<Tensor> params, double h,
                                        const std::optional<std::vector<std::vector<std::size_t>>>& coordinates) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("finite_difference_check: step h must be positive");
  if (coordinates && coordinates->size() != params.size()) {
    throw DimensionError("finite_difference_check: one coordinate list per parameter required");
  }

  const double base_a = evaluate(loss, params);
  const double base_b = evaluate(loss, params);
  if (base_a != base_b) {
    std::ostringstream os;
    os.precision(17);
    os << "finite_difference_check: loss is not deterministic (" << base_a << " vs " << base_b << ")";
    throw NondeterminismError(os.str());
  }

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& p : params) leaves.push_back(tape.leaf(p));
    const Var out = loss(tape, leaves);
    const Gradients grads = tape.backward(out);
    for (const auto& v : leaves) analytic.push_back(grads.wrt(v));
  }

  GradCheckResult result;
  for (std::size_t p = 0; p < params.size(); ++p) {
    std::vector<std::size_t> all;
    if (!coordinates) {
      all.resize(params[p].numel());
      std::iota(all.begin(), all.end(), std::size_t{0});
    }
    const auto& indices = coordinates ? (*coordinates)[p] : all;
    for (std::size_t idx : indices) {
      if (idx >= params[p].numel()) throw DimensionError("finite_difference_check: coordinate out of range");
      const double original = params[p][idx];
      params[p][idx] = original + h;
      const double plus = evaluate(loss, params);
      params[p][idx] = original - h;
      const double minus = evaluate(loss, params);
      params[p][idx] = original;

      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[p][idx];
      const double err = std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-12);
      ++result.coordinates_checked;
      if (err > result.max_relative_error || result.coordinates_checked == 1) {
        result.max_relative_error = err;
        result.worst_param = p;
        result.worst_index = idx;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace infomin
