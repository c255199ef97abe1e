// SPDX-License-Identifier: Apache-2.0
#pragma once

// Microbenchmark harness for the transform kernels. Logit buffers are
// generated from the seed alone, so every transform run with the same
// seed/dim/batch consumes identical inputs; outputs are checksummed to
// keep the compiler from discarding the work. Timing is single-threaded
// unless threads > 1 is requested.

#include <cstdint>
#include <string>

#include "arelu/transforms.hpp"

namespace arelu {

struct BenchSpec {
  TransformKind kind = TransformKind::arelu;
  double alpha = 1.5;
  double tau = 0.0;
  int dim = 1000;
  int batch = 64;
  int iters = 10;   // timed repetitions; each transforms the whole batch
  int warmup = 1;   // untimed repetitions up front
  bool f32 = false;
  int threads = 1;
  std::uint64_t seed = 1;
};

struct BenchRow {
  TransformKind kind = TransformKind::arelu;
  double alpha = 1.5;
  double tau = 0.0;
  int dim = 0;
  int batch = 0;
  int iters = 0;
  double mean_ns = 0.0;
  double p50_ns = 0.0;
  double p95_ns = 0.0;
  double checksum = 0.0;  // consumed outputs; not part of the CSV
};

BenchRow run_transform_bench(const BenchSpec& spec);

// Stable CSV interface.
std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);

}  // namespace arelu
