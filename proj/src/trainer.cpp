// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include "infomin/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <sstream>

#include "infomin/adam.hpp"
#include "infomin/errors.hpp"
#include "infomin/rng.hpp"
#include "infomin/tape.hpp"

namespace infomin {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5eed5;
constexpr std::uint64_t kMaskStream = 0xd40f;

TrainingError diverged(std::size_t step, const TrainConfig& cfg, const char* what) {
  std::ostringstream os;
  os << "training diverged at step " << step << " (lambda=" << cfg.lambda << ", tau=" << cfg.temperature
     << "): " << what;
  return TrainingError(os.str());
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (eval_interval < 1) throw ConfigError("dev-eval interval must be >= 1");
  objective().validate();
  encoder_config().validate();
}

EncoderConfig TrainConfig::encoder_config() const {
  EncoderConfig e = encoder;
  e.dropout = dropout;
  return e;
}

TrainResult train(std::span<const std::string> corpus, std::span<const StsExample> dev, const TrainConfig& cfg) {
  cfg.validate();
  if (corpus.size() < cfg.batch_size) {
    throw ConfigError("corpus has " + std::to_string(corpus.size()) + " sentences, fewer than batch size " +
                      std::to_string(cfg.batch_size));
  }
  if (dev.empty()) throw ConfigError("dev set is empty");

  const auto enc = cfg.encoder_config();
  const auto objective = cfg.objective();
  const auto tokens = tokenize_all(corpus, enc.vocab_size);

  TrainResult result;
  EncoderParams params = init_params(enc, cfg.seed);
  AdamState adam = AdamState::for_params(params.tensors);

  const std::size_t steps_per_epoch = corpus.size() / cfg.batch_size;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(cfg.epochs);
  result.trace.reserve(total_steps);

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, kShuffleStream));

  bool have_best = false;
  std::vector<TokenSequence> batch;
  batch.reserve(cfg.batch_size);
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t b = 0; b < steps_per_epoch; ++b, ++step) {
      batch.clear();
      for (std::size_t k = 0; k < cfg.batch_size; ++k) batch.push_back(tokens[order[b * cfg.batch_size + k]]);

      std::vector<Tensor> grads;
      LossBreakdown breakdown;
      try {
        Tape tape;
        const auto bound = bind_params(tape, params);
        const auto pair = make_positive_pair(bound, batch, derive_seed(cfg.seed, kMaskStream + step));
        const auto loss = total_loss(pair.z1, pair.z2, objective);
        breakdown = loss.breakdown;
        const auto g = tape.backward(loss.total);
        grads.reserve(bound.vars.size());
        for (const auto& v : bound.vars) grads.push_back(g.wrt(v));
        adam_step(params.tensors, grads, adam, cfg.learning_rate);
        for (const auto& t : params.tensors) t.require_finite("parameters after update");
      } catch (const NumericError& e) {
        throw diverged(step, cfg, e.what());
      } catch (const DegenerateEmbeddingError& e) {
        throw diverged(step, cfg, e.what());
      }
      result.trace.push_back({step, breakdown});

      const std::size_t applied = step + 1;
      if (applied % cfg.eval_interval == 0 || applied == total_steps) {
        const double score = sts_evaluate(params, dev);
        result.dev_history.push_back({applied, score});
        if (!have_best || score > result.best.dev_score) {
          result.best = Checkpoint{params, score, applied};
          have_best = true;
        }
      }
    }
  }
  result.final_params = std::move(params);
  return result;
}

std::vector<TrainConfig> expand_grid(const TrainConfig& base, const SweepGrid& grid) {
  const auto batches = grid.batch_sizes.empty() ? std::vector<std::size_t>{base.batch_size} : grid.batch_sizes;
  const auto lrs = grid.learning_rates.empty() ? std::vector<double>{base.learning_rate} : grid.learning_rates;
  const auto lambdas = grid.lambdas.empty() ? std::vector<double>{base.lambda} : grid.lambdas;
  std::vector<TrainConfig> out;
  for (auto n : batches) {
    for (double lr : lrs) {
      for (double lambda : lambdas) {
        TrainConfig c = base;
        c.batch_size = n;
        c.learning_rate = lr;
        c.lambda = lambda;
        out.push_back(c);
      }
    }
  }
  return out;
}

std::vector<SweepRow> sweep(std::span<const std::string> corpus, std::span<const StsExample> dev,
                            const TrainConfig& base, const SweepGrid& grid, unsigned threads) {
  const auto configs = expand_grid(base, grid);
  for (const auto& c : configs) c.validate();

  std::vector<SweepRow> rows(configs.size());
  const std::size_t width = std::max(1u, threads);
  for (std::size_t start = 0; start < configs.size(); start += width) {
    const std::size_t end = std::min(configs.size(), start + width);
    if (width == 1) {
      rows[start] = SweepRow{start, configs[start], train(corpus, dev, configs[start])};
      continue;
    }
    std::vector<std::future<TrainResult>> running;
    for (std::size_t i = start; i < end; ++i) {
      running.push_back(std::async(std::launch::async, [&, i] { return train(corpus, dev, configs[i]); }));
    }
    for (std::size_t i = start; i < end; ++i) rows[i] = SweepRow{i, configs[i], running[i - start].get()};
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.result.best.dev_score > b.result.best.dev_score;
  });
  return rows;
}

GradCheckResult check_joint_loss_gradients(const EncoderParams& params, std::span<const TokenSequence> batch,
                                           const ObjectiveConfig& objective, std::uint64_t mask_seed, double h) {
  params.validate();
  objective.validate();
  if (batch.empty()) throw InputError("gradient check: batch is empty");

  std::vector<std::uint32_t> used;
  for (const auto& s : batch) used.insert(used.end(), s.ids().begin(), s.ids().end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());

  EncoderParams compact = params;
  compact.config.vocab_size = used.size();
  const auto d = params.config.embed_dim;
  std::vector<double> rows;
  rows.reserve(used.size() * d);
  for (auto id : used) {
    const auto r = params.tensors[0].row(id);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  compact.tensors[0] = Tensor({used.size(), d}, std::move(rows));

  std::vector<TokenSequence> remapped;
  for (const auto& s : batch) {
    std::vector<std::uint32_t> ids;
    for (auto id : s.ids()) {
      ids.push_back(static_cast<std::uint32_t>(std::lower_bound(used.begin(), used.end(), id) - used.begin()));
    }
    remapped.emplace_back(std::move(ids), used.size());
  }

  const auto config = compact.config;
  const LossBuilder loss = [&](Tape&, std::span<const Var> vars) {
    const BoundParams bound{config, std::vector<Var>(vars.begin(), vars.end())};
    const auto pair = make_positive_pair(bound, remapped, mask_seed);
    return total_loss(pair.z1, pair.z2, objective).total;
  };
  return finite_difference_check(loss, compact.tensors, h);
}

}  // namespace infomin
