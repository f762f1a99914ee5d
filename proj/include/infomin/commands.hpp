// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "infomin/run_config.hpp"

namespace infomin {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

// Each command reads the resolved config, writes its artifacts into
// `cfg.out` and a human summary to `out`.  Errors propagate as exceptions;
// run_cli maps them to exit codes.
int cmd_generate(const RunConfig& cfg, std::ostream& out);
int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_eval(const RunConfig& cfg, std::ostream& out);
int cmd_analyze(const RunConfig& cfg, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, std::ostream& out);
int cmd_gradcheck(const RunConfig& cfg, std::ostream& out);

/// Full command line (args[0] is the subcommand).  Failures print one
/// `error: <kind>: <message>` line on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Artifact names inside the output directory.
struct RunFiles {
  static constexpr const char* kConfig = "config.txt";
  static constexpr const char* kCheckpoint = "checkpoint.txt";
  static constexpr const char* kTrace = "trace.csv";
  static constexpr const char* kDevHistory = "dev_history.csv";
  static constexpr const char* kEval = "eval.csv";
  static constexpr const char* kAnalysis = "analysis.csv";
  static constexpr const char* kSweep = "sweep.csv";
  static constexpr const char* kGradcheck = "gradcheck.csv";
};

}  // namespace infomin
