// SPDX-License-Identifier: Apache-2.0
#pragma once

// Low-level row kernels shared by the public API and the benchmark harness.
// Raw pointers, no validation, templated on float/double. All thresholds
// live in the (alpha-1)*z domain, so a threshold returned by a solver here
// can be fed straight into arelu_row.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace arelu::kernels {

namespace detail {

// t^(1/(alpha-1)) for t >= 0, with fast paths for the two common indices.
template <typename T>
inline T pow_inv_am1(T t, T alpha) {
  if (t <= T(0)) return T(0);
  if (alpha == T(1.5)) return t * t;
  if (alpha == T(2)) return t;
  return std::exp(std::log(t) / (alpha - T(1)));
}

}  // namespace detail

template <typename T>
inline void softmax_row(const T* z, T* out, std::size_t d) {
  T m = z[0];
  for (std::size_t i = 1; i < d; ++i) m = std::max(m, z[i]);
  T sum = T(0);
  for (std::size_t i = 0; i < d; ++i) {
    const T e = std::exp(z[i] - m);
    out[i] = e;
    sum += e;
  }
  const T inv = T(1) / sum;
  for (std::size_t i = 0; i < d; ++i) out[i] *= inv;
}

// out_i = [(alpha-1) z_i - tau]_+^{1/(alpha-1)}. No sort, no reduction;
// a single elementwise pass.
template <typename T>
inline void arelu_row(const T* z, T* out, std::size_t d, T alpha, T tau) {
  const T am1 = alpha - T(1);
  if (alpha == T(1.5)) {
    for (std::size_t i = 0; i < d; ++i) {
      const T t = am1 * z[i] - tau;
      out[i] = t > T(0) ? t * t : T(0);
    }
    return;
  }
  if (alpha == T(2)) {
    for (std::size_t i = 0; i < d; ++i) {
      const T t = z[i] - tau;
      out[i] = t > T(0) ? t : T(0);
    }
    return;
  }
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = detail::pow_inv_am1(am1 * z[i] - tau, alpha);
  }
}

// Euclidean projection onto the simplex by the descending-sort rule.
// Returns tau with out_i = [z_i - tau]_+. work must hold d entries.
template <typename T>
inline T sparsemax_row(const T* z, T* out, std::size_t d, T* work) {
  std::copy(z, z + d, work);
  std::sort(work, work + d, std::greater<T>());
  T cumsum = T(0);
  T cumsum_at_support = T(0);
  std::size_t support = 1;
  for (std::size_t k = 1; k <= d; ++k) {
    cumsum += work[k - 1];
    if (T(1) + T(k) * work[k - 1] > cumsum) {
      support = k;
      cumsum_at_support = cumsum;
    }
  }
  const T tau = (cumsum_at_support - T(1)) / T(support);
  for (std::size_t i = 0; i < d; ++i) {
    const T t = z[i] - tau;
    out[i] = t > T(0) ? t : T(0);
  }
  return tau;
}

// Exact 1.5-entmax: sort u = z/2 descending, scan cumulative first and
// second moments, and solve the per-support quadratic
//   tau^2 - 2 mean_k tau + (meansq_k - 1/k) = 0
// taking the lower root. The support is the last k with tau_k <= u_(k).
// Returns tau with out_i = [u_i - tau]_+^2. work must hold d entries.
template <typename T>
inline T entmax15_sorted_row(const T* z, T* out, std::size_t d, T* work) {
  T* u = work;
  for (std::size_t i = 0; i < d; ++i) u[i] = z[i] * T(0.5);
  std::sort(u, u + d, std::greater<T>());
  T s1 = T(0);
  T s2 = T(0);
  T tau = u[0] - T(1);  // k = 1 solution; always admissible
  for (std::size_t k = 1; k <= d; ++k) {
    s1 += u[k - 1];
    s2 += u[k - 1] * u[k - 1];
    const T mean = s1 / T(k);
    T disc = mean * mean - (s2 - T(1)) / T(k);
    if (disc < T(0)) disc = T(0);  // roundoff guard near ties
    const T tau_k = mean - std::sqrt(disc);
    if (tau_k <= u[k - 1]) tau = tau_k;
  }
  for (std::size_t i = 0; i < d; ++i) {
    const T t = z[i] * T(0.5) - tau;
    out[i] = t > T(0) ? t * t : T(0);
  }
  return tau;
}

// Normalization residual sum_j [(alpha-1) z_j - tau]_+^{1/(alpha-1)}.
template <typename T>
inline T entmax_residual(const T* z, std::size_t d, T alpha, T tau) {
  const T am1 = alpha - T(1);
  T sum = T(0);
  for (std::size_t i = 0; i < d; ++i) {
    sum += detail::pow_inv_am1(am1 * z[i] - tau, alpha);
  }
  return sum;
}

// General-alpha entmax. The residual is monotone nonincreasing in tau and
// the root lies in [max_j((alpha-1) z_j) - 1, max_j((alpha-1) z_j)]:
// at the upper end every term vanishes, at the lower end the max term
// alone already contributes 1. Bisect until the residual is within tol
// of 1 or max_iter halvings have been spent.
template <typename T>
inline T entmax_bisect_row(const T* z, T* out, std::size_t d, T alpha,
                           T tol, int max_iter) {
  const T am1 = alpha - T(1);
  T m = z[0];
  for (std::size_t i = 1; i < d; ++i) m = std::max(m, z[i]);
  T lo = am1 * m - T(1);
  T hi = am1 * m;
  T tau = lo;
  if (std::abs(entmax_residual(z, d, alpha, lo) - T(1)) > tol) {
    for (int it = 0; it < max_iter; ++it) {
      tau = (lo + hi) / T(2);
      const T r = entmax_residual(z, d, alpha, tau);
      if (std::abs(r - T(1)) <= tol) break;
      if (r > T(1)) {
        lo = tau;
      } else {
        hi = tau;
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = detail::pow_inv_am1(am1 * z[i] - tau, alpha);
  }
  return tau;
}

}  // namespace arelu::kernels
