// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

// Scalar re-implementation of the encoder forward pass and joint loss,
// templated on the number type.  Instantiated with __float128 it gives
// central differences whose rounding noise sits ~1e-34 below the loss, so
// gradients far below what double-precision differences can resolve are
// still checkable.

#pragma once

#include <quadmath.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

using Quad = __float128;

inline double to_double(double x) { return x; }
inline double to_double(Quad x) { return static_cast<double>(x); }

inline double m_exp(double x) { return std::exp(x); }
inline double m_log(double x) { return std::log(x); }
inline double m_tanh(double x) { return std::tanh(x); }
inline double m_sqrt(double x) { return std::sqrt(x); }
inline Quad m_exp(Quad x) { return expq(x); }
inline Quad m_log(Quad x) { return logq(x); }
inline Quad m_tanh(Quad x) { return tanhq(x); }
inline Quad m_sqrt(Quad x) { return sqrtq(x); }

struct EncoderDims {
  std::size_t embed_dim;
  std::size_t hidden_dim;
  std::size_t hidden_layers;
  std::size_t output_dim;
  bool tanh_activation = true;
};

// `tensors` uses the flat layout: table, then (weight, bias) per hidden
// layer, then head weight and bias; row-major.  `masks[view][layer]` holds
// per-activation multipliers (empty = no dropout).
template <typename T>
class JointLoss {
 public:
  JointLoss(EncoderDims dims, std::vector<std::vector<std::uint32_t>> batch, double tau, double lambda,
            std::vector<std::vector<std::vector<double>>> masks = {})
      : dims_(dims), batch_(std::move(batch)), tau_(tau), lambda_(lambda), masks_(std::move(masks)) {}

  T operator()(const std::vector<std::vector<T>>& tensors) const {
    const auto z1 = encode(tensors, 0);
    const auto z2 = encode(tensors, 1);
    const std::size_t n = batch_.size();
    const T tau = tau_;

    std::vector<T> n1(n), n2(n);
    for (std::size_t i = 0; i < n; ++i) {
      n1[i] = m_sqrt(dot(z1[i], z1[i]));
      n2[i] = m_sqrt(dot(z2[i], z2[i]));
    }
    T contrast = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const T sii = dot(z1[i], z2[i]) / (n1[i] * n2[i]);
      T mean_exp = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const T sik = dot(z1[i], z2[k]) / (n1[i] * n2[k]);
        mean_exp += m_exp((sik - sii) / tau);
      }
      contrast += m_log(mean_exp / T(static_cast<double>(n)));
    }
    contrast /= T(static_cast<double>(n));

    T penalty = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < dims_.output_dim; ++k) penalty += (z1[i][k] - z2[i][k]) * (z1[i][k] - z2[i][k]);
    }
    penalty /= T(static_cast<double>(n));
    return contrast + T(lambda_) * penalty;
  }

 private:
  static T dot(const std::vector<T>& a, const std::vector<T>& b) {
    T s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  }

  std::vector<std::vector<T>> encode(const std::vector<std::vector<T>>& p, int view) const {
    std::vector<std::vector<T>> out;
    for (std::size_t s = 0; s < batch_.size(); ++s) {
      const auto& ids = batch_[s];
      std::vector<T> h(dims_.embed_dim, T(0));
      for (auto id : ids) {
        for (std::size_t k = 0; k < dims_.embed_dim; ++k) h[k] += p[0][id * dims_.embed_dim + k];
      }
      for (auto& v : h) v /= T(static_cast<double>(ids.size()));

      std::size_t in = dims_.embed_dim;
      for (std::size_t l = 0; l < dims_.hidden_layers; ++l) {
        const auto& w = p[1 + 2 * l];
        const auto& b = p[2 + 2 * l];
        std::vector<T> next(dims_.hidden_dim);
        for (std::size_t j = 0; j < dims_.hidden_dim; ++j) {
          T acc = 0;
          for (std::size_t k = 0; k < in; ++k) acc += h[k] * w[k * dims_.hidden_dim + j];
          acc += b[j];
          if (dims_.tanh_activation) acc = m_tanh(acc);
          if (!masks_.empty() && !masks_[view][l].empty()) acc *= T(masks_[view][l][s * dims_.hidden_dim + j]);
          next[j] = acc;
        }
        h = std::move(next);
        in = dims_.hidden_dim;
      }
      const std::size_t head = 1 + 2 * dims_.hidden_layers;
      std::vector<T> z(dims_.output_dim);
      for (std::size_t j = 0; j < dims_.output_dim; ++j) {
        T acc = 0;
        for (std::size_t k = 0; k < in; ++k) acc += h[k] * p[head][k * dims_.output_dim + j];
        z[j] = acc + p[head + 1][j];
      }
      out.push_back(std::move(z));
    }
    return out;
  }

  EncoderDims dims_;
  std::vector<std::vector<std::uint32_t>> batch_;
  double tau_;
  double lambda_;
  std::vector<std::vector<std::vector<double>>> masks_;
};

// Central difference of `f` at coordinate (t, i), in the number type of f.
template <typename T, typename F>
double central_difference(const F& f, std::vector<std::vector<T>> params, std::size_t t, std::size_t i, double h) {
  const T base = params[t][i];
  params[t][i] = base + T(h);
  const T up = f(params);
  params[t][i] = base - T(h);
  const T down = f(params);
  return to_double((up - down) / (T(2.0) * T(h)));
}

}  // namespace oracle
