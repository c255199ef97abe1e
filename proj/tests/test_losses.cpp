// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "arelu/losses.hpp"
#include "oracles.hpp"

using namespace arelu;

namespace {

// Checks the closed-form gradient against central differences of the loss
// value, skipping coordinates inside the 1e-4 kink band of the arelu /
// entmax support boundary.
void check_gradient_fd(const TransformConfig& cfg, std::size_t d, int trials,
                       std::mt19937_64& rng, double tol = 1e-5) {
  std::uniform_int_distribution<int> label(0, static_cast<int>(d) - 1);
  for (int trial = 0; trial < trials; ++trial) {
    const auto z = oracles::random_logits(rng, d, 2.0);
    const int y = label(rng);
    const LossResult res = matched_loss(z, y, cfg);
    const auto fd = oracles::fd_gradient(
        [&](const std::vector<double>& v) {
          return matched_loss(v, y, cfg).value;
        },
        z);
    for (std::size_t i = 0; i < d; ++i) {
      if (cfg.kind == TransformKind::arelu &&
          std::abs((cfg.alpha - 1.0) * z[i] - cfg.tau) < 1e-4) {
        continue;
      }
      CHECK(oracles::close_rel(fd[i], res.gradient[i], tol));
    }
  }
}

}  // namespace

TEST_CASE("tsallis entropy") {
  // One-hot and all-zero inputs have zero entropy at any index.
  for (const double alpha : {1.5, 2.0, 3.0}) {
    CHECK(tsallis_entropy(std::vector<double>{0.0, 1.0, 0.0}, alpha) == 0.0);
    CHECK(tsallis_entropy(std::vector<double>{0.0, 0.0}, alpha) == 0.0);
  }
  // (4/3)(1 - 2 * 0.5^1.5)
  CHECK(tsallis_entropy(std::vector<double>{0.5, 0.5}, 1.5) ==
        doctest::Approx(0.39052429175).epsilon(1e-9));
  CHECK(tsallis_entropy(std::vector<double>{0.5, 0.5}, 2.0) ==
        doctest::Approx(0.25));
  CHECK_THROWS_AS(tsallis_entropy(std::vector<double>{0.5}, 1.0),
                  ConfigError);
  CHECK_THROWS_AS(tsallis_entropy(std::vector<double>{-0.1}, 1.5),
                  InputError);
}

TEST_CASE("arelu loss hand-evaluated example") {
  const TransformConfig cfg{.alpha = 1.5, .tau = 0.0,
                            .kind = TransformKind::arelu};
  // p = [1, 0.25, 0]; linear term (p - e_0)^T z = 0.25; entropy term
  // (4/3)(1 - 1 - 0.25^1.5) = -1/6; total 1/12. The gradient is p - e_0,
  // confirmed against finite differences below.
  const LossResult res = arelu_loss(std::vector<double>{2.0, 1.0, -1.0}, 0, cfg);
  CHECK(res.value == doctest::Approx(0.25 - 1.0 / 6).epsilon(1e-12));
  CHECK(res.gradient[0] == doctest::Approx(0.0));
  CHECK(res.gradient[1] == doctest::Approx(0.25));
  CHECK(res.gradient[2] == doctest::Approx(0.0));

  CHECK_THROWS_AS(arelu_loss(std::vector<double>{1.0, 2.0}, 2, cfg),
                  IndexError);
  CHECK_THROWS_AS(arelu_loss(std::vector<double>{1.0, 2.0}, -1, cfg),
                  IndexError);
}

TEST_CASE("arelu loss is zero exactly at its minimum") {
  const TransformConfig cfg{.alpha = 1.5, .tau = 0.5,
                            .kind = TransformKind::arelu};
  // arelu::arelu(z) = e_0 needs z_0 = (1 + tau)/(alpha - 1), others <= tau/(alpha-1).
  const std::vector<double> z{(1.0 + cfg.tau) / 0.5, 0.0, -2.0};
  const LossResult res = arelu_loss(z, 0, cfg);
  CHECK(res.value == 0.0);
  for (const double g : res.gradient) CHECK(g == 0.0);

  // Any other probe is strictly positive.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto probe = oracles::random_logits(rng, 6, 2.0);
    const LossResult r = arelu_loss(probe, 0, cfg);
    const auto w = arelu::arelu(probe, cfg);
    bool is_onehot = w.values[0] == 1.0;
    for (std::size_t i = 1; i < w.values.size(); ++i) {
      if (w.values[i] != 0.0) is_onehot = false;
    }
    if (!is_onehot) CHECK(r.value > 0.0);
  }
}

TEST_CASE("entmax loss examples") {
  const LossResult tied = entmax_loss(std::vector<double>{0.0, 0.0}, 0, 1.5);
  CHECK(tied.value == doctest::Approx(0.39052429175).epsilon(1e-9));
  CHECK(tied.gradient[0] == doctest::Approx(-0.5));
  CHECK(tied.gradient[1] == doctest::Approx(0.5));

  // Large margin puts all mass on the gold label.
  const LossResult margin =
      entmax_loss(std::vector<double>{5.0, 0.0, -1.0}, 0, 1.5);
  CHECK(margin.value == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("sparsemax loss examples and delegation") {
  const LossResult onehot = sparsemax_loss(std::vector<double>{2.0, 0.0, 0.0}, 0);
  CHECK(onehot.value == doctest::Approx(0.0).epsilon(1e-12));

  const LossResult tied = sparsemax_loss(std::vector<double>{0.0, 0.0}, 0);
  CHECK(tied.value == doctest::Approx(0.25));
  CHECK(tied.gradient[0] == doctest::Approx(-0.5));
  CHECK(tied.gradient[1] == doctest::Approx(0.5));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto z = oracles::random_logits(rng, 10, 2.0);
    const LossResult a = sparsemax_loss(z, trial % 10);
    const LossResult b = entmax_loss(z, trial % 10, 2.0);
    CHECK(std::abs(a.value - b.value) <= 1e-10);
  }
}

TEST_CASE("cross entropy examples") {
  const LossResult tied = cross_entropy(std::vector<double>{0.0, 0.0}, 0);
  CHECK(tied.value == doctest::Approx(std::log(2.0)));
  CHECK(tied.gradient[0] == doctest::Approx(-0.5));
  CHECK(tied.gradient[1] == doctest::Approx(0.5));

  // No overflow on extreme logits.
  const LossResult extreme = cross_entropy(std::vector<double>{1000.0, 0.0}, 0);
  CHECK(extreme.value == doctest::Approx(0.0));
  CHECK(std::isfinite(extreme.value));
}

TEST_CASE("gradient law: closed form matches finite differences") {
  std::mt19937_64 rng(7);
  for (const std::size_t d : {std::size_t{3}, std::size_t{10}}) {
    check_gradient_fd({.kind = TransformKind::softmax}, d, 20, rng, 1e-6);
    check_gradient_fd({.alpha = 2.0, .kind = TransformKind::sparsemax}, d, 20,
                      rng);
    check_gradient_fd(
        {.alpha = 1.5, .kind = TransformKind::entmax15_sorted}, d, 20, rng);
    check_gradient_fd(
        {.alpha = 1.5, .tau = 0.3, .kind = TransformKind::arelu}, d, 20, rng);
  }
}

TEST_CASE("arelu loss convexity probe") {
  std::mt19937_64 rng(9);
  const TransformConfig cfg{.alpha = 1.5, .tau = 0.2,
                            .kind = TransformKind::arelu};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto z1 = oracles::random_logits(rng, 8, 2.0);
    const auto z2 = oracles::random_logits(rng, 8, 2.0);
    const double lambda = unit(rng);
    std::vector<double> mix(z1.size());
    for (std::size_t i = 0; i < mix.size(); ++i) {
      mix[i] = lambda * z1[i] + (1.0 - lambda) * z2[i];
    }
    const double lhs = arelu_loss(mix, 0, cfg).value;
    const double rhs = lambda * arelu_loss(z1, 0, cfg).value +
                       (1.0 - lambda) * arelu_loss(z2, 0, cfg).value;
    CHECK(lhs <= rhs + 1e-9);
  }
}

TEST_CASE("entmax loss is insensitive to the constant-shift term") {
  std::mt19937_64 rng(11);
  for (const double alpha : {1.5, 2.0, 1.3}) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto z = oracles::random_logits(rng, 10, 2.0);
      const auto ent =
          alpha == 1.5 ? entmax15_sorted(z) : entmax_bisect(z, alpha);
      const double shift = ent.threshold / (alpha - 1.0);
      // Recompute the loss value with the shift applied, as in the arelu
      // form; since the weights sum to 1 it must not matter.
      double with_shift = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double e_y = i == 0 ? 1.0 : 0.0;
        with_shift += (ent.weights.values[i] - e_y) * (z[i] - shift);
      }
      with_shift += tsallis_entropy(ent.weights.values, alpha);
      const double without = entmax_loss(z, 0, alpha).value;
      CHECK(std::abs(with_shift - without) <= 1e-12);
    }
  }
}

TEST_CASE("loss values are nonnegative") {
  std::mt19937_64 rng(13);
  const std::vector<TransformConfig> heads = {
      {.kind = TransformKind::softmax},
      {.alpha = 2.0, .kind = TransformKind::sparsemax},
      {.alpha = 1.5, .kind = TransformKind::entmax15_sorted},
      {.alpha = 1.5, .tau = 0.3, .kind = TransformKind::arelu}};
  for (const auto& head : heads) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto z = oracles::random_logits(rng, 10, 3.0);
      CHECK(matched_loss(z, trial % 10, head).value >= -1e-12);
    }
  }
}
