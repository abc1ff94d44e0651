// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma;
// nothing here may run before cpu_supports_avx2() has returned true.

#include <immintrin.h>

#include <cmath>

#include "relnet/simd.hpp"

namespace relnet::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_avx2(const double* m, std::size_t rows, std::size_t cols, const double* x,
               double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(m + r * cols, x, cols);
}

void gemv_t_acc_avx2(const double* m, std::size_t rows, std::size_t cols,
                     const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (x[r] != 0.0) axpy_avx2(x[r], m + r * cols, y, cols);
  }
}

void ger_avx2(double alpha, const double* x, std::size_t rows, const double* y,
              std::size_t cols, double* m) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double a = alpha * x[r];
    if (a != 0.0) axpy_avx2(a, y, m + r * cols, cols);
  }
}

void adam_avx2(double* param, const double* grad, double* m, double* v, std::size_t n,
               const AdamStep& s) {
  const __m256d b1 = _mm256_set1_pd(s.beta1);
  const __m256d b2 = _mm256_set1_pd(s.beta2);
  const __m256d one_b1 = _mm256_set1_pd(1.0 - s.beta1);
  const __m256d one_b2 = _mm256_set1_pd(1.0 - s.beta2);
  const __m256d inv_bc1 = _mm256_set1_pd(1.0 / s.bias_correction1);
  const __m256d inv_bc2 = _mm256_set1_pd(1.0 / s.bias_correction2);
  const __m256d lr = _mm256_set1_pd(s.lr);
  const __m256d eps = _mm256_set1_pd(s.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m + i), _mm256_mul_pd(one_b1, g));
    const __m256d vi = _mm256_fmadd_pd(b2, _mm256_loadu_pd(v + i),
                                       _mm256_mul_pd(one_b2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d denom =
        _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vi, inv_bc2)), eps);
    const __m256d upd = _mm256_div_pd(_mm256_mul_pd(lr, _mm256_mul_pd(mi, inv_bc1)), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    param[i] -= s.lr * (m[i] / s.bias_correction1) /
                (std::sqrt(v[i] / s.bias_correction2) + s.eps);
  }
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{dot_avx2,       axpy_avx2, gemv_avx2,
                                 gemv_t_acc_avx2, ger_avx2,  adam_avx2};
  return &table;
}

}  // namespace relnet::simd
