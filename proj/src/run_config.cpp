// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include "infomin/run_config.hpp"

#include <charconv>
#include <functional>
#include <limits>

#include "infomin/csv.hpp"
#include "infomin/errors.hpp"

namespace infomin {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw UsageError("--" + key + ": " + why + " '" + value + "'");
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* last = value.data() + value.size();
  const auto res = std::from_chars(value.data(), last, out);
  if (value.empty() || res.ec != std::errc() || res.ptr != last) bad_value(key, value, "not a number");
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* last = value.data() + value.size();
  const auto res = std::from_chars(value.data(), last, out);
  if (value.empty() || res.ec != std::errc() || res.ptr != last) bad_value(key, value, "not a non-negative integer");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(to_unsigned(key, value));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = value.find(',', start);
    out.push_back(trim(std::string_view(value).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T, typename Parse>
std::vector<T> to_list(const std::string& key, const std::string& value, Parse parse) {
  std::vector<T> out;
  if (trim(value).empty()) return out;
  for (const auto& item : split_list(value)) out.push_back(parse(key, item));
  return out;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + fmt(values[i]);
  return out;
}

std::string path_text(const std::optional<std::filesystem::path>& p) { return p ? p->string() : std::string(); }

std::optional<std::filesystem::path> to_path(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return std::filesystem::path(value);
}

std::string size_text(std::size_t v) { return std::to_string(v); }

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// One entry per key; the table order is the echo order.
const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"seed",
       [](RunConfig& c, const std::string& v) {
         c.train.seed = to_unsigned("seed", v);
         c.synthetic.seed = c.train.seed;
       },
       [](const RunConfig& c) { return std::to_string(c.train.seed); }},
      {"batch",
       [](RunConfig& c, const std::string& v) { c.train.batch_size = to_size("batch", v); },
       [](const RunConfig& c) { return size_text(c.train.batch_size); }},
      {"lr",
       [](RunConfig& c, const std::string& v) { c.train.learning_rate = to_double("lr", v); },
       [](const RunConfig& c) { return format_double(c.train.learning_rate); }},
      {"epochs",
       [](RunConfig& c, const std::string& v) {
         const auto e = to_unsigned("epochs", v);
         if (e > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) bad_value("epochs", v, "out of range");
         c.train.epochs = static_cast<int>(e);
       },
       [](const RunConfig& c) { return std::to_string(c.train.epochs); }},
      {"tau",
       [](RunConfig& c, const std::string& v) { c.train.temperature = to_double("tau", v); },
       [](const RunConfig& c) { return format_double(c.train.temperature); }},
      {"lambda",
       [](RunConfig& c, const std::string& v) { c.train.lambda = to_double("lambda", v); },
       [](const RunConfig& c) { return format_double(c.train.lambda); }},
      {"dropout",
       [](RunConfig& c, const std::string& v) { c.train.dropout = to_double("dropout", v); },
       [](const RunConfig& c) { return format_double(c.train.dropout); }},
      {"eval-interval",
       [](RunConfig& c, const std::string& v) { c.train.eval_interval = to_size("eval-interval", v); },
       [](const RunConfig& c) { return size_text(c.train.eval_interval); }},
      {"vocab",
       [](RunConfig& c, const std::string& v) { c.train.encoder.vocab_size = to_size("vocab", v); },
       [](const RunConfig& c) { return size_text(c.train.encoder.vocab_size); }},
      {"embed-dim",
       [](RunConfig& c, const std::string& v) { c.train.encoder.embed_dim = to_size("embed-dim", v); },
       [](const RunConfig& c) { return size_text(c.train.encoder.embed_dim); }},
      {"hidden-dim",
       [](RunConfig& c, const std::string& v) { c.train.encoder.hidden_dim = to_size("hidden-dim", v); },
       [](const RunConfig& c) { return size_text(c.train.encoder.hidden_dim); }},
      {"layers",
       [](RunConfig& c, const std::string& v) { c.train.encoder.hidden_layers = to_size("layers", v); },
       [](const RunConfig& c) { return size_text(c.train.encoder.hidden_layers); }},
      {"output-dim",
       [](RunConfig& c, const std::string& v) { c.train.encoder.output_dim = to_size("output-dim", v); },
       [](const RunConfig& c) { return size_text(c.train.encoder.output_dim); }},
      {"activation",
       [](RunConfig& c, const std::string& v) {
         if (v == "tanh") {
           c.train.encoder.activation = Activation::kTanh;
         } else if (v == "identity") {
           c.train.encoder.activation = Activation::kIdentity;
         } else {
           bad_value("activation", v, "expected tanh or identity, got");
         }
       },
       [](const RunConfig& c) {
         return std::string(c.train.encoder.activation == Activation::kTanh ? "tanh" : "identity");
       }},
      {"grid-lambda",
       [](RunConfig& c, const std::string& v) { c.grid.lambdas = to_list<double>("grid-lambda", v, to_double); },
       [](const RunConfig& c) { return join(c.grid.lambdas, format_double); }},
      {"grid-batch",
       [](RunConfig& c, const std::string& v) { c.grid.batch_sizes = to_list<std::size_t>("grid-batch", v, to_size); },
       [](const RunConfig& c) { return join(c.grid.batch_sizes, size_text); }},
      {"grid-lr",
       [](RunConfig& c, const std::string& v) { c.grid.learning_rates = to_list<double>("grid-lr", v, to_double); },
       [](const RunConfig& c) { return join(c.grid.learning_rates, format_double); }},
      {"threads",
       [](RunConfig& c, const std::string& v) {
         const auto t = to_unsigned("threads", v);
         if (t < 1 || t > 256) bad_value("threads", v, "expected 1..256, got");
         c.threads = static_cast<unsigned>(t);
       },
       [](const RunConfig& c) { return std::to_string(c.threads); }},
      {"tolerance",
       [](RunConfig& c, const std::string& v) { c.tolerance = to_double("tolerance", v); },
       [](const RunConfig& c) { return format_double(c.tolerance); }},
      {"fd-step",
       [](RunConfig& c, const std::string& v) { c.step = to_double("fd-step", v); },
       [](const RunConfig& c) { return format_double(c.step); }},
      {"gradcheck-batch",
       [](RunConfig& c, const std::string& v) { c.gradcheck_batch = to_size("gradcheck-batch", v); },
       [](const RunConfig& c) { return size_text(c.gradcheck_batch); }},
      {"corpus-size",
       [](RunConfig& c, const std::string& v) { c.synthetic.corpus_size = to_size("corpus-size", v); },
       [](const RunConfig& c) { return size_text(c.synthetic.corpus_size); }},
      {"sts-size",
       [](RunConfig& c, const std::string& v) { c.synthetic.sts_size = to_size("sts-size", v); },
       [](const RunConfig& c) { return size_text(c.synthetic.sts_size); }},
      {"dev-size",
       [](RunConfig& c, const std::string& v) { c.synthetic.dev_size = to_size("dev-size", v); },
       [](const RunConfig& c) { return size_text(c.synthetic.dev_size); }},
      {"probe-train-size",
       [](RunConfig& c, const std::string& v) { c.synthetic.probe_train_size = to_size("probe-train-size", v); },
       [](const RunConfig& c) { return size_text(c.synthetic.probe_train_size); }},
      {"probe-test-size",
       [](RunConfig& c, const std::string& v) { c.synthetic.probe_test_size = to_size("probe-test-size", v); },
       [](const RunConfig& c) { return size_text(c.synthetic.probe_test_size); }},
      {"topics",
       [](RunConfig& c, const std::string& v) { c.synthetic.topics = to_size("topics", v); },
       [](const RunConfig& c) { return size_text(c.synthetic.topics); }},
      {"corpus", [](RunConfig& c, const std::string& v) { c.corpus = to_path(v); },
       [](const RunConfig& c) { return path_text(c.corpus); }},
      {"sts", [](RunConfig& c, const std::string& v) { c.sts = to_path(v); },
       [](const RunConfig& c) { return path_text(c.sts); }},
      {"dev", [](RunConfig& c, const std::string& v) { c.dev = to_path(v); },
       [](const RunConfig& c) { return path_text(c.dev); }},
      {"probe", [](RunConfig& c, const std::string& v) { c.probe = to_path(v); },
       [](const RunConfig& c) { return path_text(c.probe); }},
      {"probe-test", [](RunConfig& c, const std::string& v) { c.probe_test = to_path(v); },
       [](const RunConfig& c) { return path_text(c.probe_test); }},
      {"out", [](RunConfig& c, const std::string& v) { c.out = to_path(v); },
       [](const RunConfig& c) { return path_text(c.out); }},
      {"checkpoint",
       [](RunConfig& c, const std::string& v) {
         c.checkpoints.clear();
         if (trim(v).empty()) return;
         for (const auto& item : split_list(v)) {
           if (item.empty()) bad_value("checkpoint", v, "empty path in list");
           c.checkpoints.emplace_back(item);
         }
       },
       [](const RunConfig& c) {
         return join(c.checkpoints, [](const std::filesystem::path& p) { return p.string(); });
       }},
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

void apply(RunConfig& cfg, const KeyValues& values, const char* source) {
  for (const auto& [key, value] : values) {
    const auto* field = find_field(key);
    if (!field) throw UsageError(std::string(source) + ": unknown key '" + key + "'");
    field->set(cfg, value);
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
  }();
  return keys;
}

KeyValues parse_config_text(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    const auto line = trim(raw);
    if (!line.empty() && line[0] != '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
      }
      auto key = trim(std::string_view(line).substr(0, eq));
      if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
      if (!find_field(key)) {
        throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      }
      out[key] = trim(std::string_view(line).substr(eq + 1));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

KeyValues parse_config_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--config: ") + e.what());
  }
  try {
    return parse_config_text(text);
  } catch (const UsageError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

KeyValues RunConfig::echo() const {
  KeyValues out;
  for (const auto& f : fields()) out[f.key] = f.get(*this);
  return out;
}

RunConfig resolve_config(const KeyValues& file, const KeyValues& flags) {
  RunConfig cfg;
  apply(cfg, file, "config file");
  apply(cfg, flags, "command line");
  try {
    cfg.train.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!(cfg.tolerance > 0.0)) throw UsageError("--tolerance must be > 0");
  if (!(cfg.step > 0.0 && cfg.step < 1.0)) throw UsageError("--fd-step must lie in (0, 1)");
  if (cfg.gradcheck_batch < 1) throw UsageError("--gradcheck-batch must be >= 1");
  for (const auto b : cfg.grid.batch_sizes) {
    if (b < 1) throw UsageError("--grid-batch entries must be >= 1");
  }
  for (const auto lr : cfg.grid.learning_rates) {
    if (!(lr > 0.0)) throw UsageError("--grid-lr entries must be > 0");
  }
  for (const auto l : cfg.grid.lambdas) {
    if (!(l >= 0.0)) throw UsageError("--grid-lambda entries must be >= 0");
  }
  return cfg;
}

std::string format_config(const KeyValues& values) {
  std::string out;
  // Table order, not map order, so echoes read like the flag list.
  for (const auto& key : config_keys()) {
    const auto it = values.find(key);
    if (it != values.end()) out += key + "=" + it->second + "\n";
  }
  return out;
}

}  // namespace infomin
