// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include "infomin/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "infomin/errors.hpp"

namespace infomin {

namespace {

const Tensor& val(Var v) { return v.value(); }

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw std::logic_error("operands live on different tapes");
  return *a.tape;
}

Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw std::logic_error("operand is not attached to a tape");
  return *a.tape;
}

[[noreturn]] void mismatch(std::string_view op, const Shape& a, const Shape& b) {
  std::ostringstream os;
  os << op << ": incompatible shapes " << shape_to_string(a) << " and " << shape_to_string(b);
  throw DimensionError(os.str());
}

void require_matrix(std::string_view op, const Tensor& t) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got shape " + shape_to_string(t.shape()));
  }
}

std::vector<double> transpose_data(const Tensor& t) {
  const auto r = t.rows(), c = t.cols();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = t.at(i, j);
  return out;
}

// out[m×n] = a[m×k] · b[k×n], with optional transposes of the stored operands.
std::vector<double> gemm(std::span<const double> a, std::span<const double> b, std::size_t m, std::size_t k,
                         std::size_t n) {
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = b.data() + p * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return out;
}

std::vector<double> elementwise(const Tensor& a, double (*fn)(double)) {
  std::vector<double> out(a.numel());
  std::transform(a.data().begin(), a.data().end(), out.begin(), fn);
  return out;
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kAdd: return "add";
    case OpKind::kAddRow: return "add_row";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kMulConstant: return "mul_constant";
    case OpKind::kScale: return "scale";
    case OpKind::kNegate: return "negate";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kSumRows: return "sum_rows";
    case OpKind::kL2Norm: return "l2norm";
    case OpKind::kRowL2Norm: return "row_l2norm";
    case OpKind::kDivCol: return "div_col";
    case OpKind::kSubCol: return "sub_col";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kTanh: return "tanh";
    case OpKind::kDiag: return "diag";
    case OpKind::kLogMeanExpRows: return "log_mean_exp_rows";
    case OpKind::kClamp: return "clamp";
    case OpKind::kEmbedMean: return "embed_mean";
  }
  return "unknown";
}

const Tensor& Var::value() const {
  if (tape == nullptr) throw std::logic_error("Var is not attached to a tape");
  return tape->value(*this);
}

Tensor Gradients::wrt(Var v) const {
  if (v.index < grads_.size() && grads_[v.index]) return *grads_[v.index];
  return Tensor::zeros(shapes_.at(v.index));
}

Var Tape::leaf(Tensor value) {
  TapeNode node;
  node.kind = OpKind::kLeaf;
  node.value = std::move(value);
  node.requires_grad = recording();
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  TapeNode node;
  node.kind = OpKind::kConstant;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::push(OpKind kind, std::vector<Var> parents, Shape shape, std::vector<double> data, BackwardFn backward) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      std::ostringstream os;
      os << op_name(kind) << ": non-finite output " << data[i] << " at flat index " << i << " (shape "
         << shape_to_string(shape) << ")";
      throw NumericError(os.str());
    }
  }
  TapeNode node;
  node.kind = kind;
  node.value = Tensor(std::move(shape), std::move(data));
  if (recording()) {
    node.parents.reserve(parents.size());
    for (const auto& p : parents) {
      node.parents.push_back(p.index);
      node.requires_grad = node.requires_grad || nodes_[p.index].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Gradients Tape::backward(Var loss) const {
  if (!recording()) throw std::logic_error("backward() on a tape with recording off");
  if (loss.tape != this) throw std::logic_error("loss does not belong to this tape");
  const Tensor& lv = value(loss);
  if (lv.numel() != 1) {
    throw DimensionError("backward: loss must be scalar, got shape " + shape_to_string(lv.shape()));
  }

  std::vector<std::optional<Tensor>> grads(nodes_.size());
  std::vector<Shape> shapes;
  shapes.reserve(nodes_.size());
  for (const auto& n : nodes_) shapes.push_back(n.value.shape());

  grads[loss.index] = Tensor::filled(lv.shape(), 1.0);
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    const TapeNode& node = nodes_[i];
    if (!grads[i] || !node.requires_grad || !node.backward) continue;
    const GradSink sink = [&](std::size_t parent, Tensor contribution) {
      const std::size_t slot = node.parents.at(parent);
      if (!nodes_[slot].requires_grad) return;
      auto& g = grads[slot];
      if (!g) {
        g = std::move(contribution);
        return;
      }
      auto dst = g->mutable_data();
      auto src = contribution.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    };
    node.backward(*grads[i], sink);
    // Interior gradients are no longer needed once propagated.
    if (node.kind != OpKind::kLeaf) grads[i].reset();
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i]) grads[i]->require_finite(std::string("gradient of ") + std::string(op_name(nodes_[i].kind)));
  }
  return Gradients(std::move(grads), std::move(shapes));
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  require_matrix("matmul", A);
  require_matrix("matmul", B);
  if (A.cols() != B.rows()) mismatch("matmul", A.shape(), B.shape());
  const auto m = A.rows(), k = A.cols(), n = B.cols();
  auto out = gemm(A.data(), B.data(), m, k, n);
  return t.push(OpKind::kMatMul, {a, b}, {m, n}, std::move(out),
                [A, B, m, k, n](const Tensor& g, const GradSink& sink) {
                  // dA = G·Bᵀ, dB = Aᵀ·G
                  const auto bt = transpose_data(B);
                  sink(0, Tensor({m, k}, gemm(g.data(), bt, m, n, k)));
                  const auto at = transpose_data(A);
                  sink(1, Tensor({k, n}, gemm(at, g.data(), k, m, n)));
                });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  require_matrix("transpose", A);
  const auto r = A.rows(), c = A.cols();
  return t.push(OpKind::kTranspose, {a}, {c, r}, transpose_data(A), [r, c](const Tensor& g, const GradSink& sink) {
    sink(0, Tensor({r, c}, transpose_data(g)));
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  if (!A.same_shape(B)) mismatch("add", A.shape(), B.shape());
  std::vector<double> out(A.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] + B[i];
  return t.push(OpKind::kAdd, {a, b}, A.shape(), std::move(out), [](const Tensor& g, const GradSink& sink) {
    sink(0, g);
    sink(1, g);
  });
}

Var add_row(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  require_matrix("add_row", A);
  const auto m = A.rows(), n = A.cols();
  const bool row_shape = (B.rank() == 2 && B.shape()[0] == 1 && B.shape()[1] == n) || (B.rank() == 1 && B.shape()[0] == n);
  if (!row_shape) mismatch("add_row", A.shape(), B.shape());
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = A.at(i, j) + B[j];
  Shape bshape = B.shape();
  return t.push(OpKind::kAddRow, {a, b}, {m, n}, std::move(out),
                [m, n, bshape](const Tensor& g, const GradSink& sink) {
                  sink(0, g);
                  std::vector<double> db(n, 0.0);
                  for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) db[j] += g[i * n + j];
                  sink(1, Tensor(bshape, std::move(db)));
                });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  if (!A.same_shape(B)) mismatch("sub", A.shape(), B.shape());
  std::vector<double> out(A.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] - B[i];
  return t.push(OpKind::kSub, {a, b}, A.shape(), std::move(out), [](const Tensor& g, const GradSink& sink) {
    sink(0, g);
    std::vector<double> neg(g.numel());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -g[i];
    sink(1, Tensor(g.shape(), std::move(neg)));
  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  if (!A.same_shape(B)) mismatch("mul", A.shape(), B.shape());
  std::vector<double> out(A.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] * B[i];
  return t.push(OpKind::kMul, {a, b}, A.shape(), std::move(out), [A, B](const Tensor& g, const GradSink& sink) {
    std::vector<double> da(g.numel()), db(g.numel());
    for (std::size_t i = 0; i < da.size(); ++i) {
      da[i] = g[i] * B[i];
      db[i] = g[i] * A[i];
    }
    sink(0, Tensor(g.shape(), std::move(da)));
    sink(1, Tensor(g.shape(), std::move(db)));
  });
}

Var mul_constant(Var a, const Tensor& mask) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  if (!A.same_shape(mask)) mismatch("mul_constant", A.shape(), mask.shape());
  std::vector<double> out(A.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] * mask[i];
  return t.push(OpKind::kMulConstant, {a}, A.shape(), std::move(out), [mask](const Tensor& g, const GradSink& sink) {
    std::vector<double> da(g.numel());
    for (std::size_t i = 0; i < da.size(); ++i) da[i] = g[i] * mask[i];
    sink(0, Tensor(g.shape(), std::move(da)));
  });
}

Var scale(Var a, double factor) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  std::vector<double> out(A.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] * factor;
  return t.push(OpKind::kScale, {a}, A.shape(), std::move(out), [factor](const Tensor& g, const GradSink& sink) {
    std::vector<double> da(g.numel());
    for (std::size_t i = 0; i < da.size(); ++i) da[i] = g[i] * factor;
    sink(0, Tensor(g.shape(), std::move(da)));
  });
}

Var negate(Var a) { return scale(a, -1.0); }

Var sum(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  double s = 0.0;
  for (double x : A.data()) s += x;
  Shape shape = A.shape();
  return t.push(OpKind::kSum, {a}, {}, {s}, [shape](const Tensor& g, const GradSink& sink) {
    sink(0, Tensor::filled(shape, g.item()));
  });
}

Var mean(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  if (A.numel() == 0) throw DimensionError("mean: empty tensor");
  double s = 0.0;
  for (double x : A.data()) s += x;
  const double n = static_cast<double>(A.numel());
  Shape shape = A.shape();
  return t.push(OpKind::kMean, {a}, {}, {s / n}, [shape, n](const Tensor& g, const GradSink& sink) {
    sink(0, Tensor::filled(shape, g.item() / n));
  });
}

Var sum_rows(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  require_matrix("sum_rows", A);
  const auto m = A.rows(), n = A.cols();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += A.at(i, j);
  return t.push(OpKind::kSumRows, {a}, {m, 1}, std::move(out), [m, n](const Tensor& g, const GradSink& sink) {
    std::vector<double> da(m * n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) da[i * n + j] = g[i];
    sink(0, Tensor({m, n}, std::move(da)));
  });
}

Var l2norm(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  double ss = 0.0;
  for (double x : A.data()) ss += x * x;
  const double norm = std::sqrt(ss);
  return t.push(OpKind::kL2Norm, {a}, {}, {norm}, [A, norm](const Tensor& g, const GradSink& sink) {
    if (norm == 0.0) throw NumericError("l2norm: gradient undefined at the zero vector");
    std::vector<double> da(A.numel());
    for (std::size_t i = 0; i < da.size(); ++i) da[i] = g.item() * A[i] / norm;
    sink(0, Tensor(A.shape(), std::move(da)));
  });
}

Var row_l2norm(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  require_matrix("row_l2norm", A);
  const auto m = A.rows(), n = A.cols();
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    double ss = 0.0;
    for (double x : A.row(i)) ss += x * x;
    norms[i] = std::sqrt(ss);
  }
  auto saved = norms;
  return t.push(OpKind::kRowL2Norm, {a}, {m, 1}, std::move(norms),
                [A, saved, m, n](const Tensor& g, const GradSink& sink) {
                  std::vector<double> da(m * n);
                  for (std::size_t i = 0; i < m; ++i) {
                    if (saved[i] == 0.0) throw NumericError("row_l2norm: gradient undefined at a zero row");
                    for (std::size_t j = 0; j < n; ++j) da[i * n + j] = g[i] * A.at(i, j) / saved[i];
                  }
                  sink(0, Tensor({m, n}, std::move(da)));
                });
}

Var div_col(Var a, Var c) {
  Tape& t = same_tape(a, c);
  const Tensor& A = val(a);
  const Tensor& C = val(c);
  require_matrix("div_col", A);
  const auto m = A.rows(), n = A.cols();
  if (C.numel() != m || !(C.rank() == 1 || (C.rank() == 2 && C.shape()[1] == 1))) mismatch("div_col", A.shape(), C.shape());
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = A.at(i, j) / C[i];
  Shape cshape = C.shape();
  return t.push(OpKind::kDivCol, {a, c}, {m, n}, std::move(out),
                [A, C, m, n, cshape](const Tensor& g, const GradSink& sink) {
                  std::vector<double> da(m * n), dc(m, 0.0);
                  for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                      const double gij = g[i * n + j];
                      da[i * n + j] = gij / C[i];
                      dc[i] -= gij * A.at(i, j) / (C[i] * C[i]);
                    }
                  }
                  sink(0, Tensor({m, n}, std::move(da)));
                  sink(1, Tensor(cshape, std::move(dc)));
                });
}

Var sub_col(Var a, Var c) {
  Tape& t = same_tape(a, c);
  const Tensor& A = val(a);
  const Tensor& C = val(c);
  require_matrix("sub_col", A);
  const auto m = A.rows(), n = A.cols();
  if (C.numel() != m || !(C.rank() == 1 || (C.rank() == 2 && C.shape()[1] == 1))) mismatch("sub_col", A.shape(), C.shape());
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = A.at(i, j) - C[i];
  Shape cshape = C.shape();
  return t.push(OpKind::kSubCol, {a, c}, {m, n}, std::move(out), [m, n, cshape](const Tensor& g, const GradSink& sink) {
    std::vector<double> dc(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) dc[i] -= g[i * n + j];
    sink(0, g);
    sink(1, Tensor(cshape, std::move(dc)));
  });
}

Var exp(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  auto out = elementwise(A, [](double x) { return std::exp(x); });
  Tensor saved(A.shape(), out);
  return t.push(OpKind::kExp, {a}, A.shape(), std::move(out), [saved](const Tensor& g, const GradSink& sink) {
    std::vector<double> da(g.numel());
    for (std::size_t i = 0; i < da.size(); ++i) da[i] = g[i] * saved[i];
    sink(0, Tensor(g.shape(), std::move(da)));
  });
}

Var log(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  auto out = elementwise(A, [](double x) { return std::log(x); });
  return t.push(OpKind::kLog, {a}, A.shape(), std::move(out), [A](const Tensor& g, const GradSink& sink) {
    std::vector<double> da(g.numel());
    for (std::size_t i = 0; i < da.size(); ++i) da[i] = g[i] / A[i];
    sink(0, Tensor(g.shape(), std::move(da)));
  });
}

Var tanh(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  auto out = elementwise(A, [](double x) { return std::tanh(x); });
  Tensor saved(A.shape(), out);
  return t.push(OpKind::kTanh, {a}, A.shape(), std::move(out), [saved](const Tensor& g, const GradSink& sink) {
    std::vector<double> da(g.numel());
    for (std::size_t i = 0; i < da.size(); ++i) da[i] = g[i] * (1.0 - saved[i] * saved[i]);
    sink(0, Tensor(g.shape(), std::move(da)));
  });
}

Var diag(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  require_matrix("diag", A);
  const auto n = A.rows();
  if (A.cols() != n) throw DimensionError("diag: expected a square matrix, got shape " + shape_to_string(A.shape()));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = A.at(i, i);
  return t.push(OpKind::kDiag, {a}, {n, 1}, std::move(out), [n](const Tensor& g, const GradSink& sink) {
    std::vector<double> da(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) da[i * n + i] = g[i];
    sink(0, Tensor({n, n}, std::move(da)));
  });
}

Var log_mean_exp_rows(Var a) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  require_matrix("log_mean_exp_rows", A);
  const auto m = A.rows(), n = A.cols();
  if (n == 0) throw DimensionError("log_mean_exp_rows: rows are empty");
  std::vector<double> out(m);
  std::vector<double> softmax(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = A.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      softmax[i * n + j] = std::exp(r[j] - mx);
      s += softmax[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) softmax[i * n + j] /= s;
    out[i] = mx + std::log(s / static_cast<double>(n));
  }
  return t.push(OpKind::kLogMeanExpRows, {a}, {m, 1}, std::move(out),
                [softmax = std::move(softmax), m, n](const Tensor& g, const GradSink& sink) {
                  std::vector<double> da(m * n);
                  for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) da[i * n + j] = g[i] * softmax[i * n + j];
                  sink(0, Tensor({m, n}, std::move(da)));
                });
}

Var clamp(Var a, double lo, double hi) {
  Tape& t = tape_of(a);
  const Tensor& A = val(a);
  std::vector<double> out(A.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(A[i], lo, hi);
  return t.push(OpKind::kClamp, {a}, A.shape(), std::move(out), [](const Tensor& g, const GradSink& sink) {
    sink(0, g);
  });
}

Var embed_mean(Var table, std::span<const std::vector<std::uint32_t>> sequences) {
  Tape& t = tape_of(table);
  const Tensor& T = val(table);
  require_matrix("embed_mean", T);
  const auto vocab = T.rows(), d = T.cols();
  const auto n = sequences.size();
  std::vector<double> out(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& seq = sequences[i];
    if (seq.empty()) throw InputError("embed_mean: sequence " + std::to_string(i) + " is empty");
    for (auto id : seq) {
      if (id >= vocab) {
        throw DimensionError("embed_mean: token id " + std::to_string(id) + " outside table of " +
                             std::to_string(vocab) + " rows");
      }
      const auto r = T.row(id);
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] += r[j];
    }
    const double inv = 1.0 / static_cast<double>(seq.size());
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] *= inv;
  }
  std::vector<std::vector<std::uint32_t>> saved(sequences.begin(), sequences.end());
  return t.push(OpKind::kEmbedMean, {table}, {n, d}, std::move(out),
                [saved = std::move(saved), vocab, d](const Tensor& g, const GradSink& sink) {
                  std::vector<double> dt(vocab * d, 0.0);
                  for (std::size_t i = 0; i < saved.size(); ++i) {
                    const double inv = 1.0 / static_cast<double>(saved[i].size());
                    for (auto id : saved[i])
                      for (std::size_t j = 0; j < d; ++j) dt[id * d + j] += g[i * d + j] * inv;
                  }
                  sink(0, Tensor({vocab, d}, std::move(dt)));
                });
}

}  // namespace infomin
