// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infomin/evaluation.hpp"

namespace infomin {

/// Byte offset of the first invalid UTF-8 sequence, if any.
std::optional<std::size_t> find_invalid_utf8(std::string_view bytes);

/// Splits text into lines, normalizing CRLF/CR to LF.  Returns raw lines,
/// blank ones included, so callers can report 1-based line numbers.
std::vector<std::string> split_lines(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

// Parsers take file contents; the *_file variants read and UTF-8-check first.
std::vector<std::string> parse_corpus(std::string_view text);
std::vector<StsExample> parse_sts(std::string_view text);
std::vector<ProbeExample> parse_probe(std::string_view text);

std::vector<std::string> parse_corpus_file(const std::filesystem::path& path);
std::vector<StsExample> parse_sts_file(const std::filesystem::path& path);
std::vector<ProbeExample> parse_probe_file(const std::filesystem::path& path);

std::string format_corpus(std::span<const std::string> sentences);
std::string format_sts(std::span<const StsExample> examples);
std::string format_probe(std::span<const ProbeExample> examples);

struct ScoreBand {
  double low = 0.0;
  double high = 0.0;
};

/// Topic-cluster world.  Topics sit on a ring; each owns private words and
/// shares bridge words with its two neighbours.  Every sentence mixes topic
/// words with words from a small set of frequent filler words.
struct SyntheticConfig {
  std::uint64_t seed = 42;
  std::size_t corpus_size = 1024;
  std::size_t sts_size = 300;
  std::size_t dev_size = 200;
  std::size_t probe_train_size = 400;
  std::size_t probe_test_size = 200;

  std::size_t topics = 8;
  std::size_t private_words = 10;
  std::size_t bridge_words = 4;
  std::size_t filler_vocabulary = 8;
  std::size_t topic_words_per_sentence = 6;
  std::size_t filler_words_per_sentence = 6;

  ScoreBand same_topic{4.0, 5.0};
  ScoreBand neighbour_topic{2.0, 3.0};
  ScoreBand unrelated_topic{0.0, 1.0};

  static constexpr std::size_t kMinCorpus = 64;
  static constexpr std::size_t kMinSts = 50;
  static constexpr std::size_t kMinProbe = 100;

  void validate() const;
};

struct SyntheticWorld {
  std::vector<std::string> corpus;
  std::vector<int> corpus_topics;
  std::vector<StsExample> sts;
  std::vector<StsExample> dev;
  std::vector<ProbeExample> probe_train;
  std::vector<ProbeExample> probe_test;
};

class SyntheticGenerator {
 public:
  explicit SyntheticGenerator(SyntheticConfig cfg);

  SyntheticWorld generate() const;

  /// Topic words available to sentences of `topic` (private + both bridges).
  std::vector<std::string> topic_vocabulary(std::size_t topic) const;
  std::vector<std::string> filler_vocabulary() const;
  const SyntheticConfig& config() const { return cfg_; }

 private:
  SyntheticConfig cfg_;
};

/// File names written by write_world inside the output directory.
struct WorldFiles {
  static constexpr const char* kCorpus = "corpus.txt";
  static constexpr const char* kSts = "sts.tsv";
  static constexpr const char* kDev = "sts_dev.tsv";
  static constexpr const char* kProbeTrain = "probe_train.tsv";
  static constexpr const char* kProbeTest = "probe_test.tsv";
};

void write_world(const SyntheticWorld& world, const std::filesystem::path& dir);

}  // namespace infomin
