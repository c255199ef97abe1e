// SPDX-License-Identifier: Apache-2.0
#include "arelu/run_io.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#ifndef ARELU_VERSION
#define ARELU_VERSION "0.0.0"
#endif

namespace arelu {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string_view version() { return ARELU_VERSION; }

RunDir RunDir::create(const std::string& out_flag,
                      const std::string& subcommand) {
  std::filesystem::path dir;
  if (!out_flag.empty()) {
    dir = out_flag;
  } else {
    const char* root = std::getenv("ARELU_OUT_DIR");
    dir = std::filesystem::path(root != nullptr ? root : "runs") / subcommand;
  }
  std::filesystem::create_directories(dir);
  return RunDir{dir};
}

std::filesystem::path RunDir::file(const std::string& name) const {
  return dir / name;
}

void write_manifest(const RunDir& run, const std::string& subcommand,
                    std::uint64_t seed,
                    const std::map<std::string, std::string>& config,
                    const std::vector<std::string>& outputs) {
  nlohmann::ordered_json manifest;
  manifest["tool"] = "arelu";
  manifest["version"] = std::string(version());
  manifest["subcommand"] = subcommand;
  manifest["seed"] = seed;
  manifest["config"] = config;  // std::map keeps the keys sorted
  manifest["outputs"] = outputs;
  auto out = open_out(run.file("manifest.json"));
  out << manifest.dump(2) << '\n';
}

void write_train_jsonl(const std::filesystem::path& path,
                       const std::vector<TrainRecord>& log) {
  auto out = open_out(path);
  for (const TrainRecord& rec : log) {
    nlohmann::ordered_json line;
    line["step"] = rec.step;
    line["loss"] = rec.loss;
    line["accuracy"] = rec.accuracy;
    line["sparsity_mean"] = rec.sparsity_mean;
    line["wall_ms"] = rec.wall_ms;
    out << line.dump() << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::string>& rows) {
  auto out = open_out(path);
  out << header << '\n';
  for (const auto& row : rows) out << row << '\n';
}

}  // namespace arelu
