// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "infomin/encoder.hpp"
#include "infomin/evaluation.hpp"
#include "infomin/gradcheck.hpp"
#include "infomin/objectives.hpp"

namespace infomin {

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  int epochs = 3;
  double temperature = 0.05;
  double lambda = 0.4;
  double dropout = 0.1;
  std::uint64_t seed = 42;
  std::size_t eval_interval = 10;
  EncoderConfig encoder;  // encoder.dropout is overridden by `dropout`

  void validate() const;
  ObjectiveConfig objective() const { return {temperature, lambda}; }
  EncoderConfig encoder_config() const;
};

/// Loss of one update; `step` counts updates from 0.
struct TraceRow {
  std::size_t step = 0;
  LossBreakdown loss;
};

struct Checkpoint {
  EncoderParams params;
  double dev_score = 0.0;
  std::size_t step = 0;  // number of updates applied to `params`
};

struct DevEvaluation {
  std::size_t step = 0;
  double spearman = 0.0;
};

struct TrainResult {
  Checkpoint best;
  EncoderParams final_params;
  std::vector<TraceRow> trace;
  std::vector<DevEvaluation> dev_history;
};

/// Raised when the loss goes non-finite; the message carries step, λ and τ.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mini-batch training: per epoch one seeded permutation, trailing partial
/// batch dropped; per step a dropout positive pair, the joint loss, backprop
/// and an Adam update.  Dev Spearman is measured every `eval_interval`
/// updates and after the last one; the best (earliest on ties) is kept.
TrainResult train(std::span<const std::string> corpus, std::span<const StsExample> dev, const TrainConfig& cfg);

struct SweepGrid {
  std::vector<std::size_t> batch_sizes;
  std::vector<double> learning_rates;
  std::vector<double> lambdas;
};

struct SweepRow {
  std::size_t run_id = 0;  // position in grid order
  TrainConfig config;
  TrainResult result;
};

/// Cartesian product of the grid; empty axes fall back to the base value.
std::vector<TrainConfig> expand_grid(const TrainConfig& base, const SweepGrid& grid);

/// One train() per grid point with the base seed; rows sorted by best dev
/// score, descending, ties in grid order.  `threads` > 1 runs independent
/// trainings concurrently without changing the result.
std::vector<SweepRow> sweep(std::span<const std::string> corpus, std::span<const StsExample> dev,
                            const TrainConfig& base, const SweepGrid& grid, unsigned threads = 1);

/// Finite-difference check of the joint loss through the whole encoder on
/// one positive-pair batch.  Token-table rows no sentence uses cannot affect
/// the loss, so the table is first compacted to the rows `batch` references
/// and every remaining coordinate is checked.
GradCheckResult check_joint_loss_gradients(const EncoderParams& params, std::span<const TokenSequence> batch,
                                           const ObjectiveConfig& objective, std::uint64_t mask_seed, double h = 1e-5);

}  // namespace infomin
