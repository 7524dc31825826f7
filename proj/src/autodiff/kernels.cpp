#include "dre/autodiff/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>

namespace dre::kernels {
namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

int initial_threads() {
  if (const char* env = std::getenv("DRE_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return std::min(n, omp_get_max_threads());
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

int& thread_cap() {
  static int cap = initial_threads();
  return cap;
}

bool go_parallel(std::size_t work) {
  return work >= kParallelWork && thread_cap() > 1 && !omp_in_parallel();
}

}  // namespace

int max_threads() { return thread_cap(); }

void set_max_threads(int threads) { thread_cap() = std::max(1, threads); }

template <typename Real>
void matmul_serial(std::span<const Real> a, std::span<const Real> b, std::span<Real> c,
                   std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    Real* crow = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const Real aip = a[i * k + p];
      const Real* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

template <typename Real>
void matmul_parallel(std::span<const Real> a, std::span<const Real> b, std::span<Real> c,
                     std::size_t m, std::size_t k, std::size_t n) {
  if (!go_parallel(m * k * n)) {
    matmul_serial(a, b, c, m, k, n);
    return;
  }
  const int threads = thread_cap();
  if (m >= static_cast<std::size_t>(threads)) {
    const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
      Real* crow = c.data() + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const Real aip = a[i * k + p];
        const Real* brow = b.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
      }
    }
    return;
  }
  // Few rows (a single time step): split the output columns instead.
  const std::size_t block = (n + threads - 1) / threads;
#pragma omp parallel for schedule(static) num_threads(threads)
  for (int t = 0; t < threads; ++t) {
    const std::size_t j0 = t * block;
    const std::size_t j1 = std::min(n, j0 + block);
    for (std::size_t i = 0; i < m; ++i) {
      Real* crow = c.data() + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const Real aip = a[i * k + p];
        const Real* brow = b.data() + p * n;
        for (std::size_t j = j0; j < j1; ++j) crow[j] += aip * brow[j];
      }
    }
  }
}

template <typename Real>
void matmul_tn_serial(std::span<const Real> a, std::span<const Real> g, std::span<Real> c,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    Real* crow = c.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const Real aip = a[i * k + p];
      if (aip == Real{0}) continue;
      const Real* grow = g.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * grow[j];
    }
  }
}

template <typename Real>
void matmul_tn_parallel(std::span<const Real> a, std::span<const Real> g, std::span<Real> c,
                        std::size_t m, std::size_t k, std::size_t n) {
  if (!go_parallel(m * k * n)) {
    matmul_tn_serial(a, g, c, m, k, n);
    return;
  }
  const auto out_rows = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(static) num_threads(thread_cap())
  for (std::ptrdiff_t p = 0; p < out_rows; ++p) {
    Real* crow = c.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const Real aip = a[i * k + p];
      if (aip == Real{0}) continue;
      const Real* grow = g.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * grow[j];
    }
  }
}

template <typename Real>
void matmul_nt_serial(std::span<const Real> g, std::span<const Real> b, std::span<Real> c,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const Real* grow = g.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const Real* brow = b.data() + p * n;
      Real acc{0};
      for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
      c[i * k + p] += acc;
    }
  }
}

template <typename Real>
void matmul_nt_parallel(std::span<const Real> g, std::span<const Real> b, std::span<Real> c,
                        std::size_t m, std::size_t k, std::size_t n) {
  if (!go_parallel(m * k * n)) {
    matmul_nt_serial(g, b, c, m, k, n);
    return;
  }
  // Flattened (i, p) index keeps single-row products parallel too.
  const auto total = static_cast<std::ptrdiff_t>(m * k);
#pragma omp parallel for schedule(static) num_threads(thread_cap())
  for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
    const std::size_t i = idx / k;
    const std::size_t p = idx % k;
    const Real* grow = g.data() + i * n;
    const Real* brow = b.data() + p * n;
    Real acc{0};
    for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
    c[i * k + p] += acc;
  }
}

#define DRE_INSTANTIATE_KERNELS(Real)                                                        \
  template void matmul_serial<Real>(std::span<const Real>, std::span<const Real>,            \
                                    std::span<Real>, std::size_t, std::size_t, std::size_t);  \
  template void matmul_parallel<Real>(std::span<const Real>, std::span<const Real>,          \
                                      std::span<Real>, std::size_t, std::size_t,              \
                                      std::size_t);                                           \
  template void matmul_tn_serial<Real>(std::span<const Real>, std::span<const Real>,         \
                                       std::span<Real>, std::size_t, std::size_t,             \
                                       std::size_t);                                          \
  template void matmul_tn_parallel<Real>(std::span<const Real>, std::span<const Real>,       \
                                         std::span<Real>, std::size_t, std::size_t,           \
                                         std::size_t);                                        \
  template void matmul_nt_serial<Real>(std::span<const Real>, std::span<const Real>,         \
                                       std::span<Real>, std::size_t, std::size_t,             \
                                       std::size_t);                                          \
  template void matmul_nt_parallel<Real>(std::span<const Real>, std::span<const Real>,       \
                                         std::span<Real>, std::size_t, std::size_t,           \
                                         std::size_t);

DRE_INSTANTIATE_KERNELS(float)
DRE_INSTANTIATE_KERNELS(double)

#undef DRE_INSTANTIATE_KERNELS

}  // namespace dre::kernels
