// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infomin/tape.hpp"
#include "infomin/tensor.hpp"

namespace infomin {

/// Hash-bucket token ids of one sentence.  Never empty; every id < vocab size.
class TokenSequence {
 public:
  TokenSequence(std::vector<std::uint32_t> ids, std::size_t vocab_size);

  const std::vector<std::uint32_t>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  std::vector<std::uint32_t> ids_;
};

/// Lowercases ASCII letters, splits on whitespace and maps each token to
/// FNV-1a-64(token) mod vocab_size.  Throws InputError on blank text.
TokenSequence tokenize(std::string_view text, std::size_t vocab_size);
std::vector<TokenSequence> tokenize_all(std::span<const std::string> texts, std::size_t vocab_size);

enum class Activation { kTanh, kIdentity };

struct EncoderConfig {
  std::size_t vocab_size = 4096;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t hidden_layers = 2;
  std::size_t output_dim = 32;
  double dropout = 0.1;
  Activation activation = Activation::kTanh;

  void validate() const;
};

/// Token table, MLP layers and projection head, stored as a flat list:
///   [0]            embedding      vocab_size × embed_dim
///   [1 + 2l]       hidden l W     in × hidden_dim
///   [2 + 2l]       hidden l b     1 × hidden_dim
///   [1 + 2H]       head W         hidden_dim × output_dim
///   [2 + 2H]       head b         1 × output_dim
struct EncoderParams {
  EncoderConfig config;
  std::vector<Tensor> tensors;

  static std::size_t tensor_count(const EncoderConfig& config) { return 3 + 2 * config.hidden_layers; }
  static std::vector<std::string> tensor_names(const EncoderConfig& config);
  static std::vector<Shape> tensor_shapes(const EncoderConfig& config);

  std::size_t parameter_count() const;
  /// Throws ConfigError when shapes disagree with `config` or values are non-finite.
  void validate() const;

  friend bool operator==(const EncoderParams& a, const EncoderParams& b) { return a.tensors == b.tensors; }
};

/// Seeded initialization: N(0, 0.02²) token table, Glorot-uniform weights, zero biases.
EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed);

/// Inverted dropout multipliers: each entry is 0 with probability p,
/// otherwise 1/(1−p).  Same (shape, p, seed) always gives the same mask.
struct DropoutMask {
  double keep_probability = 1.0;
  std::uint64_t seed = 0;
  Tensor multipliers;

  static DropoutMask make(const Shape& shape, double p, std::uint64_t seed);
};

/// N×d embedding rows, one per sentence.
using EmbeddingMatrix = Tensor;

struct PositivePairBatch {
  EmbeddingMatrix z1;
  EmbeddingMatrix z2;
};

/// Parameters registered on a tape.
struct BoundParams {
  EncoderConfig config;
  std::vector<Var> vars;
};

BoundParams bind_params(Tape& tape, const EncoderParams& params);

/// Mean-pooled token embeddings through the MLP.  In training mode every
/// hidden activation is multiplied by its own dropout mask (derived from
/// mask_seed) and the projection head is applied; otherwise neither.
Var encode(const BoundParams& params, std::span<const TokenSequence> batch, std::uint64_t mask_seed, bool training);

EmbeddingMatrix encode(std::span<const TokenSequence> batch, const EncoderParams& params, std::uint64_t mask_seed,
                       bool training);

/// Test-mode embeddings (no dropout, no head).
EmbeddingMatrix embed(std::span<const TokenSequence> batch, const EncoderParams& params);

/// Seeds of the two views; independent derivations of `seed`.
std::uint64_t view_seed(std::uint64_t seed, int view);

struct PositivePairVars {
  Var z1;
  Var z2;
};

PositivePairVars make_positive_pair(const BoundParams& params, std::span<const TokenSequence> batch, std::uint64_t seed);
PositivePairBatch make_positive_pair(std::span<const TokenSequence> batch, const EncoderParams& params,
                                     std::uint64_t seed);

}  // namespace infomin
