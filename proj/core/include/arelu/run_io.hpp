// SPDX-License-Identifier: Apache-2.0
#pragma once

// Run-directory plumbing shared by the CLI subcommands: every run gets a
// directory containing its outputs plus a manifest.json recording the
// tool version, seed, and the fully resolved configuration, so any output
// can be regenerated from the manifest alone.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "arelu/network.hpp"

namespace arelu {

std::string_view version();

struct RunDir {
  std::filesystem::path dir;

  // out_flag wins when nonempty; otherwise <root>/<subcommand> where root
  // is $ARELU_OUT_DIR or "runs". The directory is created.
  static RunDir create(const std::string& out_flag,
                       const std::string& subcommand);

  std::filesystem::path file(const std::string& name) const;
};

void write_manifest(const RunDir& run, const std::string& subcommand,
                    std::uint64_t seed,
                    const std::map<std::string, std::string>& config,
                    const std::vector<std::string>& outputs);

// One JSON object per line with keys step, loss, accuracy, sparsity_mean,
// wall_ms. Reruns with the same seed are byte-identical except wall_ms.
void write_train_jsonl(const std::filesystem::path& path,
                       const std::vector<TrainRecord>& log);

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::string>& rows);

}  // namespace arelu
