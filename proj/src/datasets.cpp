// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include "infomin/datasets.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "infomin/csv.hpp"
#include "infomin/errors.hpp"
#include "infomin/rng.hpp"

namespace infomin {

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\f' || c == '\v'; });
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void line_error(std::size_t line, const std::string& msg) {
  throw InputError("line " + std::to_string(line) + ": " + msg);
}

std::string checked_contents(const std::filesystem::path& path) {
  auto text = read_text_file(path);
  if (const auto bad = find_invalid_utf8(text)) {
    throw InputError(path.string() + ": invalid UTF-8 at byte offset " + std::to_string(*bad));
  }
  return text;
}

template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn(checked_contents(path));
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw InputError(path.string() + ": " + msg);
  }
}

std::size_t draw_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

double draw_in(std::mt19937_64& rng, ScoreBand band) { return band.low + (band.high - band.low) * unit_double(rng()); }

template <typename T>
void portable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[draw_index(rng, i)]);
}

constexpr std::array<const char*, 16> kFillers = {"the", "a",   "of", "and", "to",  "in",   "is",   "that",
                                                  "it",  "was", "for", "on", "with", "as", "this", "by"};

}  // namespace

std::optional<std::size_t> find_invalid_utf8(std::string_view bytes) {
  std::size_t i = 0;
  const auto n = bytes.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return i;
    }
    i += len;
  }
  return std::nullopt;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(std::move(cur));
  return lines;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> parse_corpus(std::string_view text) {
  std::vector<std::string> out;
  for (auto& line : split_lines(text)) {
    if (!is_blank(line)) out.push_back(std::move(line));
  }
  if (out.empty()) throw InputError("corpus is empty");
  return out;
}

std::vector<StsExample> parse_sts(std::string_view text) {
  std::vector<StsExample> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto lineno = i + 1;
    if (lines[i].empty()) continue;
    const auto f = split_tabs(lines[i]);
    if (f.size() != 3) line_error(lineno, "expected 3 fields, got " + std::to_string(f.size()));
    if (is_blank(f[0]) || is_blank(f[1])) line_error(lineno, "empty sentence");
    double gold = 0.0;
    const auto* first = f[2].data();
    const auto* last = first + f[2].size();
    const auto res = std::from_chars(first, last, gold);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(gold)) {
      line_error(lineno, "cannot parse gold score '" + f[2] + "'");
    }
    out.push_back({f[0], f[1], gold});
  }
  if (out.empty()) throw InputError("STS file has no examples");
  return out;
}

std::vector<ProbeExample> parse_probe(std::string_view text) {
  std::vector<ProbeExample> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto lineno = i + 1;
    if (lines[i].empty()) continue;
    const auto f = split_tabs(lines[i]);
    if (f.size() != 2) line_error(lineno, "expected 2 fields, got " + std::to_string(f.size()));
    int label = 0;
    const auto* first = f[0].data();
    const auto* last = first + f[0].size();
    const auto res = std::from_chars(first, last, label);
    if (res.ec != std::errc() || res.ptr != last || label < 0) line_error(lineno, "bad label '" + f[0] + "'");
    if (is_blank(f[1])) line_error(lineno, "empty sentence");
    out.push_back({label, f[1]});
  }
  if (out.empty()) throw InputError("probe file has no examples");
  return out;
}

std::vector<std::string> parse_corpus_file(const std::filesystem::path& path) {
  return with_path(path, [](const std::string& t) { return parse_corpus(t); });
}

std::vector<StsExample> parse_sts_file(const std::filesystem::path& path) {
  return with_path(path, [](const std::string& t) { return parse_sts(t); });
}

std::vector<ProbeExample> parse_probe_file(const std::filesystem::path& path) {
  return with_path(path, [](const std::string& t) { return parse_probe(t); });
}

std::string format_corpus(std::span<const std::string> sentences) {
  std::string out;
  for (const auto& s : sentences) out += s + '\n';
  return out;
}

std::string format_sts(std::span<const StsExample> examples) {
  std::string out;
  for (const auto& e : examples) out += e.sentence_a + '\t' + e.sentence_b + '\t' + format_double(e.gold) + '\n';
  return out;
}

std::string format_probe(std::span<const ProbeExample> examples) {
  std::string out;
  for (const auto& e : examples) out += std::to_string(e.label) + '\t' + e.sentence + '\n';
  return out;
}

void SyntheticConfig::validate() const {
  if (corpus_size < kMinCorpus) throw ConfigError("synthetic corpus size must be >= " + std::to_string(kMinCorpus));
  if (sts_size < kMinSts || dev_size < kMinSts) {
    throw ConfigError("synthetic STS sizes must be >= " + std::to_string(kMinSts));
  }
  if (probe_train_size < kMinProbe || probe_test_size < kMinProbe) {
    throw ConfigError("synthetic probe sizes must be >= " + std::to_string(kMinProbe));
  }
  if (topics < 4) throw ConfigError("synthetic world needs at least 4 topics");
  if (probe_train_size < topics) throw ConfigError("probe training set must cover every topic");
  if (filler_vocabulary == 0 || filler_vocabulary > kFillers.size()) {
    throw ConfigError("filler vocabulary must be in [1, " + std::to_string(kFillers.size()) + "]");
  }
  if (topic_words_per_sentence == 0 || topic_words_per_sentence > private_words + 2 * bridge_words) {
    throw ConfigError("topic words per sentence must be in [1, topic vocabulary size]");
  }
  for (const auto* band : {&same_topic, &neighbour_topic, &unrelated_topic}) {
    if (!(band->low <= band->high) || !std::isfinite(band->low) || !std::isfinite(band->high)) {
      throw ConfigError("score band must satisfy low <= high");
    }
  }
}

SyntheticGenerator::SyntheticGenerator(SyntheticConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::vector<std::string> SyntheticGenerator::topic_vocabulary(std::size_t topic) const {
  std::vector<std::string> words;
  for (std::size_t j = 0; j < cfg_.private_words; ++j) {
    words.push_back("k" + std::to_string(topic) + "w" + std::to_string(j));
  }
  // Bridge b<k> is shared by topics k and k+1 (mod topics).
  const std::size_t left = (topic + cfg_.topics - 1) % cfg_.topics;
  for (std::size_t bridge : {left, topic}) {
    for (std::size_t j = 0; j < cfg_.bridge_words; ++j) {
      words.push_back("b" + std::to_string(bridge) + "x" + std::to_string(j));
    }
  }
  return words;
}

std::vector<std::string> SyntheticGenerator::filler_vocabulary() const {
  return {kFillers.begin(), kFillers.begin() + static_cast<std::ptrdiff_t>(cfg_.filler_vocabulary)};
}

SyntheticWorld SyntheticGenerator::generate() const {
  std::vector<std::vector<std::string>> vocab;
  for (std::size_t k = 0; k < cfg_.topics; ++k) vocab.push_back(topic_vocabulary(k));
  const auto fillers = filler_vocabulary();

  auto sentence = [&](std::size_t topic, std::mt19937_64& rng) {
    auto pool = vocab[topic];
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < cfg_.topic_words_per_sentence; ++i) {
      const auto j = i + draw_index(rng, pool.size() - i);
      std::swap(pool[i], pool[j]);
      tokens.push_back(pool[i]);
    }
    for (std::size_t i = 0; i < cfg_.filler_words_per_sentence; ++i) tokens.push_back(fillers[draw_index(rng, fillers.size())]);
    portable_shuffle(tokens, rng);
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) out += (i ? " " : "") + tokens[i];
    return out;
  };

  auto ring_distance = [&](std::size_t a, std::size_t b) {
    const auto d = a > b ? a - b : b - a;
    return std::min(d, cfg_.topics - d);
  };

  auto sts_pairs = [&](std::size_t count, std::uint64_t stream) {
    std::mt19937_64 rng(derive_seed(cfg_.seed, stream));
    std::vector<StsExample> out;
    for (std::size_t i = 0; i < count; ++i) {
      const auto a = draw_index(rng, cfg_.topics);
      const auto relation = draw_index(rng, 3);
      std::size_t b = a;
      ScoreBand band = cfg_.same_topic;
      if (relation == 1) {
        b = (a + (draw_index(rng, 2) ? 1 : cfg_.topics - 1)) % cfg_.topics;
        band = cfg_.neighbour_topic;
      } else if (relation == 2) {
        std::vector<std::size_t> far;
        for (std::size_t t = 0; t < cfg_.topics; ++t)
          if (ring_distance(a, t) >= 2) far.push_back(t);
        b = far[draw_index(rng, far.size())];
        band = cfg_.unrelated_topic;
      }
      auto sa = sentence(a, rng);
      auto sb = sentence(b, rng);
      out.push_back({std::move(sa), std::move(sb), draw_in(rng, band)});
    }
    return out;
  };

  auto probe_set = [&](std::size_t count, std::uint64_t stream) {
    std::mt19937_64 rng(derive_seed(cfg_.seed, stream));
    std::vector<int> labels(count);
    for (std::size_t i = 0; i < count; ++i) labels[i] = static_cast<int>(i % cfg_.topics);
    portable_shuffle(labels, rng);
    std::vector<ProbeExample> out;
    for (int y : labels) out.push_back({y, sentence(static_cast<std::size_t>(y), rng)});
    return out;
  };

  SyntheticWorld world;
  {
    std::mt19937_64 rng(derive_seed(cfg_.seed, 1));
    for (std::size_t i = 0; i < cfg_.corpus_size; ++i) {
      const auto topic = draw_index(rng, cfg_.topics);
      world.corpus_topics.push_back(static_cast<int>(topic));
      world.corpus.push_back(sentence(topic, rng));
    }
  }
  world.sts = sts_pairs(cfg_.sts_size, 2);
  world.dev = sts_pairs(cfg_.dev_size, 3);
  world.probe_train = probe_set(cfg_.probe_train_size, 4);
  world.probe_test = probe_set(cfg_.probe_test_size, 5);
  return world;
}

void write_world(const SyntheticWorld& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << text;
  };
  write(WorldFiles::kCorpus, format_corpus(world.corpus));
  write(WorldFiles::kSts, format_sts(world.sts));
  write(WorldFiles::kDev, format_sts(world.dev));
  write(WorldFiles::kProbeTrain, format_probe(world.probe_train));
  write(WorldFiles::kProbeTest, format_probe(world.probe_test));
}

}  // namespace infomin
