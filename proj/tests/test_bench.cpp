// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "arelu/bench.hpp"

using namespace arelu;

TEST_CASE("bench produces timing rows and a stable csv header") {
  CHECK(bench_csv_header() ==
        "transform,alpha,tau,dim,batch,iters,mean_ns,p50_ns,p95_ns");

  BenchSpec spec{.kind = TransformKind::softmax, .dim = 256, .batch = 8,
                 .iters = 3, .warmup = 1, .seed = 7};
  const BenchRow row = run_transform_bench(spec);
  CHECK(row.mean_ns > 0.0);
  CHECK(row.p50_ns > 0.0);
  CHECK(row.p95_ns >= row.p50_ns);
  CHECK(row.checksum != 0.0);

  const std::string line = bench_csv_row(row);
  CHECK(line.rfind("softmax,1.5,0,256,8,3,", 0) == 0);
}

TEST_CASE("one timed iteration records exactly one sample") {
  BenchSpec spec{.kind = TransformKind::arelu, .dim = 64, .batch = 4,
                 .iters = 1, .warmup = 0, .seed = 3};
  const BenchRow row = run_transform_bench(spec);
  CHECK(row.mean_ns == row.p50_ns);
  CHECK(row.mean_ns == row.p95_ns);
}

TEST_CASE("f32 and f64 modes run every transform on shared inputs") {
  for (const bool f32 : {false, true}) {
    for (const TransformKind kind :
         {TransformKind::softmax, TransformKind::sparsemax,
          TransformKind::entmax15_sorted, TransformKind::entmax_bisect,
          TransformKind::arelu}) {
      BenchSpec spec{.kind = kind, .dim = 128, .batch = 4, .iters = 2,
                     .warmup = 0, .f32 = f32, .seed = 11};
      const BenchRow row = run_transform_bench(spec);
      CHECK(row.mean_ns > 0.0);
    }
  }
}

TEST_CASE("threaded mode matches single-threaded checksums") {
  BenchSpec spec{.kind = TransformKind::entmax15_sorted, .dim = 512,
                 .batch = 16, .iters = 2, .warmup = 0, .seed = 13};
  const BenchRow solo = run_transform_bench(spec);
  spec.threads = 4;
  const BenchRow pooled = run_transform_bench(spec);
  CHECK(solo.checksum == pooled.checksum);
}

TEST_CASE("bench validates its configuration") {
  CHECK_THROWS_AS(run_transform_bench({.dim = 1}), ConfigError);
  CHECK_THROWS_AS(run_transform_bench({.dim = 16, .batch = 0}), ConfigError);
  CHECK_THROWS_AS(run_transform_bench({.dim = 16, .iters = 0}), ConfigError);
}
