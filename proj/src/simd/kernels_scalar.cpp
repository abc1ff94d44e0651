#include <cmath>

#include "relnet/simd.hpp"

namespace relnet::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(m + r * cols, x, cols);
}

void gemv_t_acc_scalar(const double* m, std::size_t rows, std::size_t cols,
                       const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (x[r] != 0.0) axpy_scalar(x[r], m + r * cols, y, cols);
  }
}

void ger_scalar(double alpha, const double* x, std::size_t rows, const double* y,
                std::size_t cols, double* m) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double a = alpha * x[r];
    if (a != 0.0) axpy_scalar(a, y, m + r * cols, cols);
  }
}

void adam_scalar(double* param, const double* grad, double* m, double* v, std::size_t n,
                 const AdamStep& s) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / s.bias_correction1;
    const double v_hat = v[i] / s.bias_correction2;
    param[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{dot_scalar,       axpy_scalar, gemv_scalar,
                                 gemv_t_acc_scalar, ger_scalar,  adam_scalar};
  return table;
}

}  // namespace relnet::simd
