// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "infomin/trainer.hpp"

namespace infomin {

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

struct LoadedCheckpoint {
  Checkpoint checkpoint;
  ConfigEcho config;
};

/// Text container, version 1:
///
///   infomin-checkpoint 1
///   step <updates>
///   dev_score <hexfloat>
///   encoder.<field> <value>        (vocab_size, embed_dim, ... activation)
///   config <key> <value>           (free-form echo of the run config)
///   tensor <name> <rows> <cols>
///   <rows lines of hexfloats>
///   end
///
/// Doubles are written as hexadecimal floating point, so a load returns
/// bit-identical parameters and score.
std::string serialize_checkpoint(const Checkpoint& checkpoint, const ConfigEcho& config = {});
LoadedCheckpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint, const ConfigEcho& config = {});
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace infomin
