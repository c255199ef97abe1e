// SPDX-License-Identifier: Apache-2.0
#include "arelu/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "arelu/kernels.hpp"

namespace arelu {

namespace {

template <typename T>
void apply_rows(TransformKind kind, T alpha, T tau, const T* in, T* out,
                int rows, int dim, T* work) {
  const T tol = sizeof(T) == 4 ? T(1e-6) : T(1e-14);
  for (int r = 0; r < rows; ++r) {
    const T* z = in + static_cast<std::size_t>(r) * dim;
    T* o = out + static_cast<std::size_t>(r) * dim;
    switch (kind) {
      case TransformKind::softmax:
        kernels::softmax_row(z, o, static_cast<std::size_t>(dim));
        break;
      case TransformKind::sparsemax:
        kernels::sparsemax_row(z, o, static_cast<std::size_t>(dim), work);
        break;
      case TransformKind::entmax15_sorted:
        kernels::entmax15_sorted_row(z, o, static_cast<std::size_t>(dim),
                                     work);
        break;
      case TransformKind::entmax_bisect:
        kernels::entmax_bisect_row(z, o, static_cast<std::size_t>(dim), alpha,
                                   tol, 100);
        break;
      case TransformKind::arelu:
        kernels::arelu_row(z, o, static_cast<std::size_t>(dim), alpha, tau);
        break;
    }
  }
}

template <typename T>
BenchRow run_impl(const BenchSpec& spec) {
  const std::size_t total =
      static_cast<std::size_t>(spec.dim) * static_cast<std::size_t>(spec.batch);
  std::vector<T> in(total);
  std::vector<T> out(total);

  // Draw in double so f32 and f64 runs see the same logit values.
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : in) v = static_cast<T>(normal(rng));

  const int threads = std::max(1, spec.threads);
  const T alpha = static_cast<T>(spec.alpha);
  const T tau = static_cast<T>(spec.tau);

  const auto run_once = [&] {
    if (threads == 1) {
      std::vector<T> work(static_cast<std::size_t>(spec.dim));
      apply_rows(spec.kind, alpha, tau, in.data(), out.data(), spec.batch,
                 spec.dim, work.data());
      return;
    }
    std::vector<std::thread> pool;
    const int chunk = (spec.batch + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(spec.batch, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        std::vector<T> work(static_cast<std::size_t>(spec.dim));
        apply_rows(spec.kind, alpha, tau,
                   in.data() + static_cast<std::size_t>(lo) * spec.dim,
                   out.data() + static_cast<std::size_t>(lo) * spec.dim,
                   hi - lo, spec.dim, work.data());
      });
    }
    for (auto& th : pool) th.join();
  };

  for (int w = 0; w < spec.warmup; ++w) run_once();

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(spec.iters));
  double checksum = 0.0;
  for (int it = 0; it < spec.iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    run_once();
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(
        std::chrono::duration<double, std::nano>(t1 - t0).count());
    // Consume a strided slice of the outputs outside the timed window.
    for (std::size_t i = 0; i < total; i += 997) {
      checksum += static_cast<double>(out[i]);
    }
  }

  std::sort(samples.begin(), samples.end());
  double mean = 0.0;
  for (const double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  const auto pct = [&samples](double q) {
    const auto idx = static_cast<std::size_t>(
        q * static_cast<double>(samples.size() - 1));
    return samples[idx];
  };

  BenchRow row;
  row.kind = spec.kind;
  row.alpha = spec.alpha;
  row.tau = spec.tau;
  row.dim = spec.dim;
  row.batch = spec.batch;
  row.iters = spec.iters;
  row.mean_ns = mean;
  row.p50_ns = pct(0.5);
  row.p95_ns = pct(0.95);
  row.checksum = checksum;
  return row;
}

}  // namespace

BenchRow run_transform_bench(const BenchSpec& spec) {
  if (spec.dim < 2) throw ConfigError("bench: dim must be >= 2");
  if (spec.batch < 1 || spec.iters < 1) {
    throw ConfigError("bench: batch and iters must be >= 1");
  }
  if (spec.warmup < 0) throw ConfigError("bench: warmup must be >= 0");
  return spec.f32 ? run_impl<float>(spec) : run_impl<double>(spec);
}

std::string bench_csv_header() {
  return "transform,alpha,tau,dim,batch,iters,mean_ns,p50_ns,p95_ns";
}

std::string bench_csv_row(const BenchRow& row) {
  std::ostringstream os;
  os << to_string(row.kind) << ',' << row.alpha << ',' << row.tau << ','
     << row.dim << ',' << row.batch << ',' << row.iters << ','
     << static_cast<long long>(row.mean_ns) << ','
     << static_cast<long long>(row.p50_ns) << ','
     << static_cast<long long>(row.p95_ns);
  return os.str();
}

}  // namespace arelu
