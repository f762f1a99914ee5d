// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "infomin/tensor.hpp"

namespace infomin {

enum class OpKind : std::uint8_t {
  kLeaf,
  kConstant,
  kMatMul,
  kTranspose,
  kAdd,
  kAddRow,
  kSub,
  kMul,
  kMulConstant,
  kScale,
  kNegate,
  kSum,
  kMean,
  kSumRows,
  kL2Norm,
  kRowL2Norm,
  kDivCol,
  kSubCol,
  kExp,
  kLog,
  kTanh,
  kDiag,
  kLogMeanExpRows,
  kClamp,
  kEmbedMean,
};

std::string_view op_name(OpKind kind);

class Tape;

/// Handle to a node on a Tape.  Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t index = 0;

  const Tensor& value() const;
};

/// Accumulates a gradient contribution into the parent slot `parent`.
using GradSink = std::function<void(std::size_t parent, Tensor contribution)>;
using BackwardFn = std::function<void(const Tensor& grad_out, const GradSink& sink)>;

struct TapeNode {
  OpKind kind = OpKind::kConstant;
  std::vector<std::size_t> parents;
  Tensor value;
  bool requires_grad = false;
  // Closure over the saved forward values this op's backward rule needs.
  BackwardFn backward;
};

class Gradients {
 public:
  Gradients(std::vector<std::optional<Tensor>> grads, std::vector<Shape> shapes)
      : grads_(std::move(grads)), shapes_(std::move(shapes)) {}

  /// Gradient of the loss w.r.t. `v`; zeros when `v` did not influence the loss.
  Tensor wrt(Var v) const;

 private:
  std::vector<std::optional<Tensor>> grads_;
  std::vector<Shape> shapes_;
};

/// Linear record of forward operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so parents always precede their
/// children.  With recording off only forward values are kept and
/// backward() is unavailable.
class Tape {
 public:
  enum class Recording { kOn, kOff };

  explicit Tape(Recording recording = Recording::kOn) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_ == Recording::kOn; }

  Var leaf(Tensor value);
  Var constant(Tensor value);

  const Tensor& value(Var v) const { return nodes_.at(v.index).value; }
  const TapeNode& node(Var v) const { return nodes_.at(v.index); }
  std::size_t size() const { return nodes_.size(); }

  Gradients backward(Var loss) const;

  // Used by op implementations.
  Var push(OpKind kind, std::vector<Var> parents, Shape shape, std::vector<double> data, BackwardFn backward);

 private:
  Recording recording_;
  std::vector<TapeNode> nodes_;
};

// Forward ops.  Each appends one node to the tape its inputs live on.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
/// a[m×n] + b broadcast over rows; b is [1×n] or [n].
Var add_row(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// Multiplication by data that is not differentiated (dropout masks).
Var mul_constant(Var a, const Tensor& mask);
Var scale(Var a, double factor);
Var negate(Var a);
Var sum(Var a);
Var mean(Var a);
/// [m×n] -> [m×1]
Var sum_rows(Var a);
Var l2norm(Var a);
/// [m×n] -> [m×1] Euclidean norm of each row.
Var row_l2norm(Var a);
/// a[m×n] divided row-wise by c[m×1].
Var div_col(Var a, Var c);
/// a[m×n] minus c[m×1] broadcast along each row.
Var sub_col(Var a, Var c);
Var exp(Var a);
Var log(Var a);
Var tanh(Var a);
/// [n×n] -> [n×1]
Var diag(Var a);
/// Row-wise log((1/n) Σ_j exp(a_ij)), evaluated with the row max subtracted.
Var log_mean_exp_rows(Var a);
/// Clamps values into [lo, hi]; the gradient passes straight through.
Var clamp(Var a, double lo, double hi);
/// Mean of table rows per sequence: out[i] = mean_t table[seq_i[t]].
Var embed_mean(Var table, std::span<const std::vector<std::uint32_t>> sequences);

}  // namespace infomin
