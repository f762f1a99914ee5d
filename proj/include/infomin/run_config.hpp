// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "infomin/datasets.hpp"
#include "infomin/trainer.hpp"

namespace infomin {

/// Bad flags, missing files or invalid combinations.  Maps to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using KeyValues = std::map<std::string, std::string>;

/// Keys accepted in config files; each is also a `--<key>` flag.
const std::vector<std::string>& config_keys();

/// Flat `key=value` lines.  Blank lines and lines starting with '#' are
/// ignored; whitespace around key and value is trimmed.
KeyValues parse_config_text(std::string_view text);
KeyValues parse_config_file(const std::filesystem::path& path);

struct RunConfig {
  TrainConfig train;
  SweepGrid grid;
  SyntheticConfig synthetic;
  unsigned threads = 1;
  double tolerance = 1e-4;  // gradcheck pass threshold
  double step = 1e-5;       // gradcheck finite-difference step
  std::size_t gradcheck_batch = 4;

  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> sts;
  std::optional<std::filesystem::path> dev;  // checkpoint selection; falls back to `sts`
  std::optional<std::filesystem::path> probe;
  std::optional<std::filesystem::path> probe_test;
  std::optional<std::filesystem::path> out;
  std::vector<std::filesystem::path> checkpoints;

  /// Every resolved field as key=value, in config_keys() order.
  KeyValues echo() const;
};

/// Built-in defaults, overridden by `file`, overridden by `flags`.  Unknown
/// keys, unparseable values and out-of-range settings are UsageErrors.
RunConfig resolve_config(const KeyValues& file, const KeyValues& flags);

std::string format_config(const KeyValues& values);

}  // namespace infomin
