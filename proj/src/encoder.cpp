// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include "infomin/encoder.hpp"

#include <cctype>
#include <cmath>
#include <random>

#include "infomin/errors.hpp"
#include "infomin/rng.hpp"

namespace infomin {

namespace {

constexpr double kEmbeddingInitStd = 0.02;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::vector<std::uint32_t>> raw_ids(std::span<const TokenSequence> batch) {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(batch.size());
  for (const auto& s : batch) out.push_back(s.ids());
  return out;
}

}  // namespace

TokenSequence::TokenSequence(std::vector<std::uint32_t> ids, std::size_t vocab_size) : ids_(std::move(ids)) {
  if (ids_.empty()) throw InputError("token sequence is empty");
  for (auto id : ids_) {
    if (id >= vocab_size) {
      throw InputError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(vocab_size));
    }
  }
}

TokenSequence tokenize(std::string_view text, std::size_t vocab_size) {
  if (vocab_size == 0) throw ConfigError("vocabulary size must be positive");
  std::vector<std::uint32_t> ids;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    ids.push_back(static_cast<std::uint32_t>(fnv1a(token) % vocab_size));
    token.clear();
  };
  for (char c : text) {
    if (is_space(c)) {
      flush();
    } else {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  if (ids.empty()) throw InputError("sentence is empty after whitespace trimming");
  return TokenSequence(std::move(ids), vocab_size);
}

std::vector<TokenSequence> tokenize_all(std::span<const std::string> texts, std::size_t vocab_size) {
  std::vector<TokenSequence> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(tokenize(texts[i], vocab_size));
    } catch (const InputError& e) {
      throw InputError("sentence " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

void EncoderConfig::validate() const {
  if (vocab_size == 0 || embed_dim == 0 || hidden_dim == 0 || output_dim == 0) {
    throw ConfigError("encoder dimensions must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

std::vector<std::string> EncoderParams::tensor_names(const EncoderConfig& config) {
  std::vector<std::string> names{"embedding"};
  for (std::size_t l = 0; l < config.hidden_layers; ++l) {
    names.push_back("hidden" + std::to_string(l) + ".weight");
    names.push_back("hidden" + std::to_string(l) + ".bias");
  }
  names.emplace_back("head.weight");
  names.emplace_back("head.bias");
  return names;
}

std::vector<Shape> EncoderParams::tensor_shapes(const EncoderConfig& config) {
  std::vector<Shape> shapes{{config.vocab_size, config.embed_dim}};
  std::size_t in = config.embed_dim;
  for (std::size_t l = 0; l < config.hidden_layers; ++l) {
    shapes.push_back({in, config.hidden_dim});
    shapes.push_back({1, config.hidden_dim});
    in = config.hidden_dim;
  }
  shapes.push_back({in, config.output_dim});
  shapes.push_back({1, config.output_dim});
  return shapes;
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.numel();
  return n;
}

void EncoderParams::validate() const {
  config.validate();
  const auto shapes = tensor_shapes(config);
  if (tensors.size() != shapes.size()) {
    throw ConfigError("encoder expects " + std::to_string(shapes.size()) + " parameter tensors, got " +
                      std::to_string(tensors.size()));
  }
  const auto names = tensor_names(config);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (tensors[i].shape() != shapes[i]) {
      throw ConfigError("parameter " + names[i] + " has shape " + shape_to_string(tensors[i].shape()) +
                        ", config requires " + shape_to_string(shapes[i]));
    }
    try {
      tensors[i].require_finite(names[i]);
    } catch (const NumericError& e) {
      throw ConfigError(e.what());
    }
  }
}

EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(derive_seed(seed, 0x1417));
  EncoderParams params{config, {}};
  const auto shapes = EncoderParams::tensor_shapes(config);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& shape = shapes[i];
    std::vector<double> data(shape_numel(shape), 0.0);
    if (i == 0) {
      std::normal_distribution<double> normal(0.0, kEmbeddingInitStd);
      for (auto& x : data) x = normal(rng);
    } else if (shape[0] > 1) {  // weights; biases (1 × n) stay zero
      const double limit = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
      std::uniform_real_distribution<double> uniform(-limit, limit);
      for (auto& x : data) x = uniform(rng);
    }
    params.tensors.emplace_back(shape, std::move(data));
  }
  return params;
}

DropoutMask DropoutMask::make(const Shape& shape, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  const double keep = 1.0 - p;
  const double scale = 1.0 / keep;
  std::vector<double> data(shape_numel(shape), 1.0);
  if (p > 0.0) {
    std::mt19937_64 rng(seed);
    for (auto& x : data) x = unit_double(rng()) < keep ? scale : 0.0;
  }
  return DropoutMask{keep, seed, Tensor(shape, std::move(data))};
}

BoundParams bind_params(Tape& tape, const EncoderParams& params) {
  params.validate();
  BoundParams bound{params.config, {}};
  bound.vars.reserve(params.tensors.size());
  for (const auto& t : params.tensors) bound.vars.push_back(tape.leaf(t));
  return bound;
}

Var encode(const BoundParams& params, std::span<const TokenSequence> batch, std::uint64_t mask_seed, bool training) {
  const auto& cfg = params.config;
  if (batch.empty()) throw InputError("encode: batch is empty");
  if (params.vars.size() != EncoderParams::tensor_count(cfg)) throw ConfigError("encode: parameter count mismatch");
  for (const auto& seq : batch) {
    for (auto id : seq.ids()) {
      if (id >= cfg.vocab_size) throw ConfigError("encode: token id exceeds configured vocabulary");
    }
  }

  const auto ids = raw_ids(batch);
  Var h = embed_mean(params.vars[0], ids);
  for (std::size_t l = 0; l < cfg.hidden_layers; ++l) {
    h = add_row(matmul(h, params.vars[1 + 2 * l]), params.vars[2 + 2 * l]);
    if (cfg.activation == Activation::kTanh) h = tanh(h);
    if (training && cfg.dropout > 0.0) {
      const auto mask = DropoutMask::make(h.value().shape(), cfg.dropout, derive_seed(mask_seed, l));
      h = mul_constant(h, mask.multipliers);
    }
  }
  if (!training) return h;
  const std::size_t head = 1 + 2 * cfg.hidden_layers;
  return add_row(matmul(h, params.vars[head]), params.vars[head + 1]);
}

EmbeddingMatrix encode(std::span<const TokenSequence> batch, const EncoderParams& params, std::uint64_t mask_seed,
                       bool training) {
  Tape tape(Tape::Recording::kOff);
  const auto bound = bind_params(tape, params);
  return encode(bound, batch, mask_seed, training).value();
}

EmbeddingMatrix embed(std::span<const TokenSequence> batch, const EncoderParams& params) {
  return encode(batch, params, 0, false);
}

std::uint64_t view_seed(std::uint64_t seed, int view) {
  return derive_seed(seed, view == 0 ? 0xA11CEULL : 0xB0BULL);
}

PositivePairVars make_positive_pair(const BoundParams& params, std::span<const TokenSequence> batch,
                                    std::uint64_t seed) {
  Var z1 = encode(params, batch, view_seed(seed, 0), true);
  Var z2 = encode(params, batch, view_seed(seed, 1), true);
  return {z1, z2};
}

PositivePairBatch make_positive_pair(std::span<const TokenSequence> batch, const EncoderParams& params,
                                     std::uint64_t seed) {
  Tape tape(Tape::Recording::kOff);
  const auto bound = bind_params(tape, params);
  const auto vars = make_positive_pair(bound, batch, seed);
  return {vars.z1.value(), vars.z2.value()};
}

}  // namespace infomin
