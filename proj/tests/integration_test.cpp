// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

// generate -> train -> eval -> analyze through the command surface, on the
// default synthetic world and default training settings.

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "infomin/checkpoint.hpp"
#include "infomin/commands.hpp"
#include "infomin/csv.hpp"
#include "infomin/datasets.hpp"
#include "infomin/evaluation.hpp"

using namespace infomin;
namespace fs = std::filesystem;

namespace {

int cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  if (out) *out = o.str();
  if (code != 0) MESSAGE(e.str());
  return code;
}

}  // namespace

TEST_CASE("end to end on the default world") {
  const auto root = fs::temp_directory_path() / "infomin_integration";
  fs::remove_all(root);
  const auto data = root / "data";
  const auto run = root / "run";
  auto file = [&](const char* name) { return (data / name).string(); };

  REQUIRE(cli({"generate", "--out", data.string()}) == 0);
  REQUIRE(cli({"train", "--corpus", file(WorldFiles::kCorpus), "--sts", file(WorldFiles::kSts), "--dev",
               file(WorldFiles::kDev), "--out", run.string()}) == 0);
  const auto trained = load_checkpoint(run / RunFiles::kCheckpoint);

  // A random-init checkpoint with the same architecture for comparison.
  const auto baseline_path = root / "init.txt";
  const auto init = init_params(trained.checkpoint.params.config, 42);
  const auto dev = parse_sts_file(file(WorldFiles::kDev));
  save_checkpoint(baseline_path, Checkpoint{init, sts_evaluate(init, dev), 0});

  std::string printed;
  REQUIRE(cli({"eval", "--checkpoint", (run / RunFiles::kCheckpoint).string(), "--sts", file(WorldFiles::kSts),
               "--probe", file(WorldFiles::kProbeTrain), "--probe-test", file(WorldFiles::kProbeTest), "--out",
               (root / "eval").string()},
              &printed) == 0);
  const auto report = parse_csv(read_text_file(root / "eval" / RunFiles::kEval));
  REQUIRE(report.size() == 2);
  const double spearman = std::stod(report[1][1]);
  const double alignment = std::stod(report[1][2]);
  const double uniformity = std::stod(report[1][3]);
  const double probe = std::stod(report[1][4]);
  MESSAGE("trained: spearman " << spearman << ", alignment " << alignment << ", uniformity " << uniformity
                               << ", probe " << probe);
  CHECK(spearman >= -1.0);
  CHECK(spearman <= 1.0);
  CHECK(alignment >= 0.0);
  CHECK(uniformity <= 0.0);
  CHECK(probe >= 0.0);
  CHECK(probe <= 1.0);
  CHECK(printed.find("spearman " + report[1][1]) != std::string::npos);

  const auto sts = parse_sts_file(file(WorldFiles::kSts));
  CHECK(spearman == sts_evaluate(trained.checkpoint.params, sts));
  CHECK(spearman > sts_evaluate(init, sts));

  REQUIRE(cli({"analyze", "--checkpoint", baseline_path.string() + "," + (run / RunFiles::kCheckpoint).string(),
               "--sts", file(WorldFiles::kSts), "--probe-test", file(WorldFiles::kProbeTest), "--out",
               (root / "analysis").string()}) == 0);
  const auto table = parse_csv(read_text_file(root / "analysis" / RunFiles::kAnalysis));
  REQUIRE(table.size() == 3);
  CHECK(fs::path(table[1][0]) == baseline_path);
  CHECK(std::stod(table[2][1]) == alignment);
  CHECK(std::stod(table[2][2]) == uniformity);
  CHECK(std::stod(table[2][3]) == spearman);
  // Training spreads the embeddings out.
  CHECK(std::stod(table[2][2]) < std::stod(table[1][2]));
}
