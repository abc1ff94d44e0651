#include <atomic>
#include <cstdlib>
#include <string>

#include "relnet/error.hpp"
#include "relnet/simd.hpp"

namespace relnet::simd {

#ifndef RELNET_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_supports_avx2() {
#if defined(RELNET_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend detect_backend() {
  const bool avx2 = cpu_supports_avx2() && avx2_kernels() != nullptr;
  if (const char* env = std::getenv("RELNET_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Backend::kScalar;
    if (want == "avx2" && avx2) return Backend::kAvx2;
  }
  return avx2 ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{
      detect_backend() == Backend::kAvx2 ? avx2_kernels() : &scalar_kernels()};
  return table;
}

void check_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InputError(std::string("simd: length mismatch in ") + what + " (" +
                     std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

Backend active_backend() {
  return active_table().load() == &scalar_kernels() ? Backend::kScalar : Backend::kAvx2;
}

void set_backend(Backend b) {
  if (b == Backend::kScalar) {
    active_table().store(&scalar_kernels());
    return;
  }
  if (!cpu_supports_avx2() || avx2_kernels() == nullptr) {
    throw InputError("simd: AVX2 backend requested but not available");
  }
  active_table().store(avx2_kernels());
}

std::string_view backend_name(Backend b) {
  return b == Backend::kScalar ? "scalar" : "avx2";
}

const KernelTable& kernels() { return *active_table().load(); }

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size(), "dot");
  return kernels().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size(), "axpy");
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(const Matrix& m, std::span<const double> x, std::span<double> y) {
  check_same(m.cols(), x.size(), "gemv (cols)");
  check_same(m.rows(), y.size(), "gemv (rows)");
  kernels().gemv(m.flat().data(), m.rows(), m.cols(), x.data(), y.data());
}

void gemv_t_acc(const Matrix& m, std::span<const double> x, std::span<double> y) {
  check_same(m.rows(), x.size(), "gemv_t_acc (rows)");
  check_same(m.cols(), y.size(), "gemv_t_acc (cols)");
  kernels().gemv_t_acc(m.flat().data(), m.rows(), m.cols(), x.data(), y.data());
}

void ger(double alpha, std::span<const double> x, std::span<const double> y, Matrix& m) {
  check_same(m.rows(), x.size(), "ger (rows)");
  check_same(m.cols(), y.size(), "ger (cols)");
  kernels().ger(alpha, x.data(), m.rows(), y.data(), m.cols(), m.flat().data());
}

void adam(std::span<double> param, std::span<const double> grad, std::span<double> m,
          std::span<double> v, const AdamStep& step) {
  check_same(param.size(), grad.size(), "adam (grad)");
  check_same(param.size(), m.size(), "adam (m)");
  check_same(param.size(), v.size(), "adam (v)");
  kernels().adam(param.data(), grad.data(), m.data(), v.data(), param.size(), step);
}

}  // namespace relnet::simd
