// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include "infomin/commands.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "infomin/checkpoint.hpp"
#include "infomin/csv.hpp"
#include "infomin/datasets.hpp"
#include "infomin/errors.hpp"
#include "infomin/evaluation.hpp"
#include "infomin/trainer.hpp"

namespace infomin {

namespace fs = std::filesystem;

namespace {

const fs::path& require_path(const std::optional<fs::path>& path, const char* flag, const char* command) {
  if (!path) throw UsageError(std::string("--") + flag + " is required for " + command);
  return *path;
}

// Paths are checked before any work starts so a typo fails fast as a usage error.
void require_readable(const fs::path& path, const char* flag) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw UsageError(std::string("--") + flag + ": no such file: " + path.string());
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw UsageError(std::string("--") + flag + ": cannot read " + path.string());
}

void check_optional(const std::optional<fs::path>& path, const char* flag) {
  if (path) require_readable(*path, flag);
}

fs::path prepare_out(const RunConfig& cfg, const char* command) {
  const auto& dir = require_path(cfg.out, "out", command);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("--out: cannot create directory " + dir.string());
  const auto marker = dir / ".write-test";
  {
    std::ofstream test(marker);
    if (!test) throw UsageError("--out: directory not writable: " + dir.string());
  }
  fs::remove(marker, ec);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void echo_config(const RunConfig& cfg, const fs::path& dir) {
  write_text(dir / RunFiles::kConfig, format_config(cfg.echo()));
}

// Hyperparameters only: paths stay out so identical runs in different
// directories produce identical checkpoint bytes.
ConfigEcho model_echo(const RunConfig& cfg) {
  static const std::set<std::string> keys = {"seed", "batch", "lr", "epochs", "tau", "lambda", "dropout", "eval-interval"};
  ConfigEcho echo;
  const auto all = cfg.echo();
  for (const auto& key : config_keys()) {
    if (keys.count(key)) echo.emplace_back(key, all.at(key));
  }
  return echo;
}

std::vector<StsExample> selection_set(const RunConfig& cfg) {
  if (cfg.dev) return parse_sts_file(*cfg.dev);
  return parse_sts_file(*cfg.sts);
}

// Sentences for alignment/uniformity: the held-out probe split when given,
// otherwise the distinct STS sentences in file order.
std::vector<std::string> held_out_sentences(const std::vector<StsExample>* sts,
                                            const std::vector<ProbeExample>* probe_test) {
  std::vector<std::string> out;
  if (probe_test) {
    for (const auto& ex : *probe_test) out.push_back(ex.sentence);
    return out;
  }
  std::set<std::string> seen;
  for (const auto& ex : *sts) {
    for (const auto* s : {&ex.sentence_a, &ex.sentence_b}) {
      if (seen.insert(*s).second) out.push_back(*s);
    }
  }
  return out;
}

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

struct Metrics {
  std::optional<double> spearman, alignment, uniformity, probe_accuracy;
  std::vector<std::string> notes;
};

template <typename Fn>
std::optional<double> guarded(const char* name, Metrics& m, Fn&& fn) {
  try {
    return fn();
  } catch (const DegenerateEmbeddingError& e) {
    m.notes.push_back(std::string(name) + ": " + e.what());
  } catch (const UndefinedStatisticError& e) {
    m.notes.push_back(std::string(name) + ": " + e.what());
  }
  return std::nullopt;
}

std::string joined_notes(const Metrics& m) {
  std::string out;
  for (std::size_t i = 0; i < m.notes.size(); ++i) out += (i ? "; " : "") + m.notes[i];
  return out;
}

struct EvalInputs {
  std::vector<StsExample> sts;
  std::optional<std::vector<ProbeExample>> probe_train, probe_test;
};

Metrics measure(const EncoderParams& params, const EvalInputs& in, std::uint64_t seed) {
  Metrics m;
  m.spearman = guarded("spearman", m, [&] { return sts_evaluate(params, in.sts); });
  const auto sentences = held_out_sentences(&in.sts, in.probe_test ? &*in.probe_test : nullptr);
  const auto seqs = tokenize_all(sentences, params.config.vocab_size);
  std::optional<std::pair<double, double>> au;
  try {
    au = alignment_uniformity(params, seqs, seed);
  } catch (const DegenerateEmbeddingError& e) {
    m.notes.push_back(std::string("alignment/uniformity: ") + e.what());
  }
  if (au) {
    m.alignment = au->first;
    m.uniformity = au->second;
  }
  if (in.probe_train && in.probe_test) {
    m.probe_accuracy = probe_train_eval(*in.probe_train, *in.probe_test, params);
  } else {
    m.notes.push_back("probe_accuracy: needs --probe and --probe-test");
  }
  return m;
}

EvalInputs load_eval_inputs(const RunConfig& cfg) {
  EvalInputs in;
  in.sts = parse_sts_file(*cfg.sts);
  if (cfg.probe) in.probe_train = parse_probe_file(*cfg.probe);
  if (cfg.probe_test) in.probe_test = parse_probe_file(*cfg.probe_test);
  return in;
}

}  // namespace

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  try {
    cfg.synthetic.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto dir = prepare_out(cfg, "generate");
  const auto world = SyntheticGenerator(cfg.synthetic).generate();
  write_world(world, dir);
  echo_config(cfg, dir);
  out << "wrote " << world.corpus.size() << " corpus sentences, " << world.sts.size() << " STS pairs, "
      << world.dev.size() << " dev pairs, " << world.probe_train.size() << "+" << world.probe_test.size()
      << " probe examples to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  require_readable(require_path(cfg.corpus, "corpus", "train"), "corpus");
  if (!cfg.dev && !cfg.sts) throw UsageError("--dev (or --sts) is required for train");
  check_optional(cfg.dev, "dev");
  check_optional(cfg.sts, "sts");
  const auto dir = prepare_out(cfg, "train");

  const auto corpus = parse_corpus_file(*cfg.corpus);
  const auto dev = selection_set(cfg);
  const auto result = train(corpus, dev, cfg.train);

  echo_config(cfg, dir);
  save_checkpoint(dir / RunFiles::kCheckpoint, result.best, model_echo(cfg));
  {
    CsvWriter trace(dir / RunFiles::kTrace,
                    {"step", "contrast", "reconstruction", "total", "alignment_term", "uniformity_term"});
    for (const auto& row : result.trace) {
      trace.write({std::to_string(row.step), format_double(row.loss.contrast_loss),
                   format_double(row.loss.reconstruction_penalty), format_double(row.loss.total),
                   format_double(row.loss.alignment_term), format_double(row.loss.uniformity_term)});
    }
  }
  {
    CsvWriter history(dir / RunFiles::kDevHistory, {"step", "spearman"});
    for (const auto& e : result.dev_history) history.write({std::to_string(e.step), format_double(e.spearman)});
  }
  out << "steps " << result.trace.size() << ", best dev spearman " << format_double(result.best.dev_score)
      << " after " << result.best.step << " updates\n";
  out << "checkpoint " << (dir / RunFiles::kCheckpoint).string() << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  if (cfg.checkpoints.size() != 1) throw UsageError("--checkpoint: eval takes exactly one checkpoint");
  require_readable(cfg.checkpoints.front(), "checkpoint");
  require_readable(require_path(cfg.sts, "sts", "eval"), "sts");
  check_optional(cfg.probe, "probe");
  check_optional(cfg.probe_test, "probe-test");
  if (cfg.probe.has_value() != cfg.probe_test.has_value()) {
    throw UsageError("--probe and --probe-test must be given together");
  }
  const auto dir = prepare_out(cfg, "eval");

  const auto loaded = load_checkpoint(cfg.checkpoints.front());
  const auto m = measure(loaded.checkpoint.params, load_eval_inputs(cfg), cfg.train.seed);

  echo_config(cfg, dir);
  CsvWriter csv(dir / RunFiles::kEval,
                {"checkpoint", "spearman", "alignment", "uniformity", "probe_accuracy", "notes"});
  csv.write({cfg.checkpoints.front().string(), opt_double(m.spearman), opt_double(m.alignment),
             opt_double(m.uniformity), opt_double(m.probe_accuracy), joined_notes(m)});

  auto line = [&](const char* name, const std::optional<double>& v) {
    out << name << " " << (v ? format_double(*v) : std::string("null")) << "\n";
  };
  line("spearman", m.spearman);
  line("alignment", m.alignment);
  line("uniformity", m.uniformity);
  line("probe_accuracy", m.probe_accuracy);
  if (!m.notes.empty()) out << "notes " << joined_notes(m) << "\n";
  return kExitOk;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  if (cfg.checkpoints.empty()) throw UsageError("--checkpoint is required for analyze");
  for (const auto& p : cfg.checkpoints) require_readable(p, "checkpoint");
  require_readable(require_path(cfg.sts, "sts", "analyze"), "sts");
  check_optional(cfg.probe_test, "probe-test");
  const auto dir = prepare_out(cfg, "analyze");

  EvalInputs in;
  in.sts = parse_sts_file(*cfg.sts);
  if (cfg.probe_test) in.probe_test = parse_probe_file(*cfg.probe_test);

  echo_config(cfg, dir);
  CsvWriter csv(dir / RunFiles::kAnalysis, {"checkpoint", "alignment", "uniformity", "spearman", "notes"});
  for (const auto& path : cfg.checkpoints) {
    const auto loaded = load_checkpoint(path);
    auto m = measure(loaded.checkpoint.params, in, cfg.train.seed);
    m.notes.erase(std::remove_if(m.notes.begin(), m.notes.end(),
                                 [](const std::string& n) { return n.rfind("probe_accuracy", 0) == 0; }),
                  m.notes.end());
    csv.write({path.string(), opt_double(m.alignment), opt_double(m.uniformity), opt_double(m.spearman),
               joined_notes(m)});
    out << path.string() << ": alignment " << opt_double(m.alignment) << ", uniformity " << opt_double(m.uniformity)
        << ", spearman " << opt_double(m.spearman) << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  require_readable(require_path(cfg.corpus, "corpus", "sweep"), "corpus");
  if (!cfg.dev && !cfg.sts) throw UsageError("--dev (or --sts) is required for sweep");
  check_optional(cfg.dev, "dev");
  check_optional(cfg.sts, "sts");
  check_optional(cfg.probe, "probe");
  check_optional(cfg.probe_test, "probe-test");
  if (cfg.probe.has_value() != cfg.probe_test.has_value()) {
    throw UsageError("--probe and --probe-test must be given together");
  }
  const auto dir = prepare_out(cfg, "sweep");

  const auto corpus = parse_corpus_file(*cfg.corpus);
  const auto dev = selection_set(cfg);
  EvalInputs in;
  in.sts = cfg.sts ? parse_sts_file(*cfg.sts) : dev;
  if (cfg.probe) in.probe_train = parse_probe_file(*cfg.probe);
  if (cfg.probe_test) in.probe_test = parse_probe_file(*cfg.probe_test);

  const auto rows = sweep(corpus, dev, cfg.train, cfg.grid, cfg.threads);

  echo_config(cfg, dir);
  CsvWriter csv(dir / RunFiles::kSweep,
                {"run_id", "seed", "batch", "lr", "epochs", "tau", "lambda", "dropout", "best_step", "dev_spearman",
                 "spearman", "alignment", "uniformity", "probe_accuracy", "final_contrast", "final_reconstruction",
                 "final_total", "notes"});
  for (const auto& row : rows) {
    const auto& c = row.config;
    auto m = measure(row.result.best.params, in, c.seed);
    const auto& last = row.result.trace.back().loss;
    csv.write({std::to_string(row.run_id), std::to_string(c.seed), std::to_string(c.batch_size),
               format_double(c.learning_rate), std::to_string(c.epochs), format_double(c.temperature),
               format_double(c.lambda), format_double(c.dropout), std::to_string(row.result.best.step),
               format_double(row.result.best.dev_score), opt_double(m.spearman), opt_double(m.alignment),
               opt_double(m.uniformity), opt_double(m.probe_accuracy), format_double(last.contrast_loss),
               format_double(last.reconstruction_penalty), format_double(last.total), joined_notes(m)});
    out << "run " << row.run_id << " batch " << c.batch_size << " lr " << format_double(c.learning_rate)
        << " lambda " << format_double(c.lambda) << ": dev spearman " << format_double(row.result.best.dev_score)
        << "\n";
  }
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
  check_optional(cfg.corpus, "corpus");
  std::optional<fs::path> dir;
  if (cfg.out) dir = prepare_out(cfg, "gradcheck");

  std::vector<std::string> corpus;
  if (cfg.corpus) {
    corpus = parse_corpus_file(*cfg.corpus);
  } else {
    corpus = SyntheticGenerator(cfg.synthetic).generate().corpus;
  }
  if (corpus.size() < cfg.gradcheck_batch) {
    throw UsageError("--gradcheck-batch " + std::to_string(cfg.gradcheck_batch) + " exceeds corpus size " +
                     std::to_string(corpus.size()));
  }
  const std::vector<std::string> head(corpus.begin(), corpus.begin() + static_cast<std::ptrdiff_t>(cfg.gradcheck_batch));
  const auto enc = cfg.train.encoder_config();
  const auto params = init_params(enc, cfg.train.seed);
  const auto batch = tokenize_all(head, enc.vocab_size);

  const auto start = std::chrono::steady_clock::now();
  const auto r = check_joint_loss_gradients(params, batch, cfg.train.objective(), cfg.train.seed, cfg.step);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = r.max_relative_error < cfg.tolerance;

  out << "max_relative_error " << format_double(r.max_relative_error) << "\n";
  out << "coordinates " << r.coordinates_checked << ", worst tensor "
      << EncoderParams::tensor_names(enc)[r.worst_param] << "[" << r.worst_index << "] analytic "
      << format_double(r.worst_analytic) << " numeric " << format_double(r.worst_numeric) << "\n";
  out << (pass ? "ok" : "FAILED") << " (tolerance " << format_double(cfg.tolerance) << ", " << seconds << " s)\n";
  if (dir) {
    echo_config(cfg, *dir);
    CsvWriter csv(*dir / RunFiles::kGradcheck, {"max_relative_error", "coordinates", "worst_tensor", "worst_index",
                                                "worst_analytic", "worst_numeric", "tolerance", "pass"});
    csv.write({format_double(r.max_relative_error), std::to_string(r.coordinates_checked),
               EncoderParams::tensor_names(enc)[r.worst_param], std::to_string(r.worst_index),
               format_double(r.worst_analytic), format_double(r.worst_numeric), format_double(cfg.tolerance),
               pass ? "true" : "false"});
  }
  return pass ? kExitOk : kExitFailure;
}

namespace {

const std::vector<std::string> kModelKeys = {"seed",  "batch", "lr",        "epochs",     "tau",
                                             "lambda", "dropout", "eval-interval", "vocab", "embed-dim",
                                             "hidden-dim", "layers", "output-dim", "activation"};
const std::vector<std::string> kSizeKeys = {"corpus-size",     "sts-size", "dev-size", "probe-train-size",
                                            "probe-test-size", "topics"};

struct Command {
  const char* name;
  const char* help;
  std::vector<std::string> keys;
  int (*fn)(const RunConfig&, std::ostream&);
};

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<Command> commands() {
  return {
      {"generate", "write a seeded synthetic corpus, STS and probe files", concat({{"seed", "out"}, kSizeKeys}),
       cmd_generate},
      {"train", "train an encoder and keep the best dev checkpoint",
       concat({kModelKeys, {"corpus", "sts", "dev", "out"}}), cmd_train},
      {"eval", "score a checkpoint: STS spearman, alignment, uniformity, probe",
       {"seed", "checkpoint", "sts", "probe", "probe-test", "out"}, cmd_eval},
      {"analyze", "alignment/uniformity/spearman table over checkpoints",
       {"seed", "checkpoint", "sts", "probe-test", "out"}, cmd_analyze},
      {"sweep", "train over a batch/lr/lambda grid",
       concat({kModelKeys,
               {"grid-lambda", "grid-batch", "grid-lr", "threads", "corpus", "sts", "dev", "probe", "probe-test",
                "out"}}),
       cmd_sweep},
      {"gradcheck", "finite-difference check of the joint loss through the encoder",
       concat({kModelKeys, {"corpus", "tolerance", "fd-step", "gradcheck-batch", "out"}, kSizeKeys}), cmd_gradcheck},
  };
}

const std::map<std::string, std::string>& flag_help() {
  static const std::map<std::string, std::string> help{
      {"seed", "run seed: init, shuffling, dropout masks, synthetic world (42)"},
      {"batch", "batch size N (32)"},
      {"lr", "Adam learning rate (0.001)"},
      {"epochs", "passes over the corpus (3)"},
      {"tau", "softmax temperature (0.05)"},
      {"lambda", "reconstruction penalty weight (0.4)"},
      {"dropout", "dropout probability (0.1)"},
      {"eval-interval", "updates between dev evaluations (10)"},
      {"vocab", "hashed vocabulary size (4096)"},
      {"embed-dim", "token embedding width (64)"},
      {"hidden-dim", "hidden layer width (64)"},
      {"layers", "hidden layers (2)"},
      {"output-dim", "projection head width (32)"},
      {"activation", "tanh or identity (tanh)"},
      {"grid-lambda", "comma-separated lambda values"},
      {"grid-batch", "comma-separated batch sizes"},
      {"grid-lr", "comma-separated learning rates"},
      {"threads", "concurrent sweep runs (1)"},
      {"tolerance", "gradcheck pass threshold (1e-4)"},
      {"fd-step", "finite-difference step (1e-5)"},
      {"gradcheck-batch", "sentences in the gradcheck batch (4)"},
      {"corpus-size", "synthetic corpus sentences (1024)"},
      {"sts-size", "synthetic STS pairs (300)"},
      {"dev-size", "synthetic dev STS pairs (200)"},
      {"probe-train-size", "synthetic probe training sentences (400)"},
      {"probe-test-size", "synthetic probe test sentences (200)"},
      {"topics", "synthetic topics (8)"},
      {"corpus", "training corpus, one sentence per line"},
      {"sts", "STS file: sentence TAB sentence TAB gold"},
      {"dev", "STS file for checkpoint selection (defaults to --sts)"},
      {"probe", "probe training file: label TAB sentence"},
      {"probe-test", "probe test file: label TAB sentence"},
      {"out", "output directory"},
      {"checkpoint", "checkpoint file(s), comma-separated"},
  };
  return help;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return "usage";
  if (dynamic_cast<const InputError*>(&e)) return "input";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const TrainingError*>(&e)) return "training";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric";
  if (dynamic_cast<const DegenerateEmbeddingError*>(&e)) return "degenerate";
  if (dynamic_cast<const UndefinedStatisticError*>(&e)) return "statistic";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  return "runtime";
}

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contrastive sentence-embedding toolkit with a reconstruction penalty", "infomin"};
  app.require_subcommand(1);
  app.fallthrough(false);

  const auto table = commands();
  std::vector<std::map<std::string, std::string>> values(table.size());
  std::vector<std::string> config_paths(table.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto* sub = app.add_subcommand(table[i].name, table[i].help);
    sub->add_option("--config", config_paths[i], "key=value file; flags override it");
    for (const auto& key : table[i].keys) sub->add_option("--" + key, values[i][key], flag_help().at(key));
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << "\n";
    return kExitUsage;
  }

  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      KeyValues flags;
      for (const auto& key : table[i].keys) {
        if (subs[i]->count("--" + key) > 0) flags[key] = values[i][key];
      }
      const auto file = config_paths[i].empty() ? KeyValues{} : parse_config_file(config_paths[i]);
      const auto cfg = resolve_config(file, flags);
      return table[i].fn(cfg, out);
    } catch (const std::exception& e) {
      const auto kind = error_kind(e);
      err << "error: " << kind << ": " << one_line(e.what()) << "\n";
      return kind == "usage" ? kExitUsage : kExitFailure;
    }
  }
  return kExitUsage;
}

}  // namespace infomin
