#pragma once

// Inner-loop kernels used by the model and the optimizer. Each kernel has a
// portable scalar reference and an AVX2/FMA variant; the active backend is
// picked once at startup from CPUID and can be forced with RELNET_SIMD
// (values: "scalar", "avx2").

#include <span>
#include <string_view>

#include "relnet/tensor.hpp"

namespace relnet::simd {

enum class Backend { kScalar, kAvx2 };

struct AdamStep {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

// Raw kernel signatures. Lengths are passed explicitly; callers go through
// the span wrappers below, which check shapes.
struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[r] = sum_c m[r*cols + c] * x[c]
  void (*gemv)(const double* m, std::size_t rows, std::size_t cols, const double* x,
               double* y);
  // y[c] += sum_r m[r*cols + c] * x[r]
  void (*gemv_t_acc)(const double* m, std::size_t rows, std::size_t cols,
                     const double* x, double* y);
  // m[r*cols + c] += alpha * x[r] * y[c]
  void (*ger)(double alpha, const double* x, std::size_t rows, const double* y,
              std::size_t cols, double* m);
  void (*adam)(double* param, const double* grad, double* m, double* v, std::size_t n,
               const AdamStep& step);
};

const KernelTable& scalar_kernels();
/// Null when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();

bool cpu_supports_avx2();
Backend active_backend();
/// Forces a backend; throws InputError if AVX2 is requested but unavailable.
void set_backend(Backend b);
std::string_view backend_name(Backend b);
const KernelTable& kernels();

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void gemv(const Matrix& m, std::span<const double> x, std::span<double> y);
void gemv_t_acc(const Matrix& m, std::span<const double> x, std::span<double> y);
void ger(double alpha, std::span<const double> x, std::span<const double> y, Matrix& m);
void adam(std::span<double> param, std::span<const double> grad, std::span<double> m,
          std::span<double> v, const AdamStep& step);

}  // namespace relnet::simd
