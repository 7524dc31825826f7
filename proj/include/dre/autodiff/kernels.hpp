#pragma once

#include <cstddef>
#include <span>

// Dense inner loops used by the autodiff graph. Every kernel has a serial
// reference and an OpenMP variant; the two produce bit-identical results
// because each output element is accumulated by one thread in the same
// order as the serial loop.
namespace dre::kernels {

enum class Exec { serial, parallel };

// Number of worker threads the parallel kernels may use. Initialized from
// the DRE_THREADS environment variable when set.
int max_threads();
void set_max_threads(int threads);

// c[m x n] += a[m x k] * b[k x n]
template <typename Real>
void matmul_serial(std::span<const Real> a, std::span<const Real> b, std::span<Real> c,
                   std::size_t m, std::size_t k, std::size_t n);
template <typename Real>
void matmul_parallel(std::span<const Real> a, std::span<const Real> b, std::span<Real> c,
                     std::size_t m, std::size_t k, std::size_t n);

// c[k x n] += a[m x k]^T * g[m x n]
template <typename Real>
void matmul_tn_serial(std::span<const Real> a, std::span<const Real> g, std::span<Real> c,
                      std::size_t m, std::size_t k, std::size_t n);
template <typename Real>
void matmul_tn_parallel(std::span<const Real> a, std::span<const Real> g, std::span<Real> c,
                        std::size_t m, std::size_t k, std::size_t n);

// c[m x k] += g[m x n] * b[k x n]^T
template <typename Real>
void matmul_nt_serial(std::span<const Real> g, std::span<const Real> b, std::span<Real> c,
                      std::size_t m, std::size_t k, std::size_t n);
template <typename Real>
void matmul_nt_parallel(std::span<const Real> g, std::span<const Real> b, std::span<Real> c,
                        std::size_t m, std::size_t k, std::size_t n);

template <typename Real>
void matmul(std::span<const Real> a, std::span<const Real> b, std::span<Real> c,
            std::size_t m, std::size_t k, std::size_t n, Exec exec = Exec::parallel) {
  if (exec == Exec::serial) {
    matmul_serial(a, b, c, m, k, n);
  } else {
    matmul_parallel(a, b, c, m, k, n);
  }
}

template <typename Real>
void matmul_tn(std::span<const Real> a, std::span<const Real> g, std::span<Real> c,
               std::size_t m, std::size_t k, std::size_t n, Exec exec = Exec::parallel) {
  if (exec == Exec::serial) {
    matmul_tn_serial(a, g, c, m, k, n);
  } else {
    matmul_tn_parallel(a, g, c, m, k, n);
  }
}

template <typename Real>
void matmul_nt(std::span<const Real> g, std::span<const Real> b, std::span<Real> c,
               std::size_t m, std::size_t k, std::size_t n, Exec exec = Exec::parallel) {
  if (exec == Exec::serial) {
    matmul_nt_serial(g, b, c, m, k, n);
  } else {
    matmul_nt_parallel(g, b, c, m, k, n);
  }
}

}  // namespace dre::kernels
