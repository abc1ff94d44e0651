#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "relnet/error.hpp"
#include "relnet/simd.hpp"

using namespace relnet;

namespace {

// Reassociation in the vector kernels moves results by a few ulps of the
// magnitudes involved.
void close(double a, double b, double scale) { CHECK(std::abs(a - b) <= 1e-12 * (1.0 + scale)); }

double abs_sum(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
  return s;
}

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  std::mt19937_64 rng(1);
  const auto& k = simd::scalar_kernels();
  const auto a = testing::random_vector(13, rng), b = testing::random_vector(13, rng);
  double ref = 0.0;
  for (std::size_t i = 0; i < 13; ++i) ref += a[i] * b[i];
  CHECK(k.dot(a.data(), b.data(), 13) == doctest::Approx(ref).epsilon(1e-14));

  Matrix m(3, 4);
  for (std::size_t i = 0; i < m.size(); ++i) m.flat()[i] = static_cast<double>(i);
  Vector x{1, 2, 3, 4}, y(3);
  k.gemv(m.flat().data(), 3, 4, x.data(), y.data());
  CHECK(y == Vector{20, 60, 100});
  Vector xt{1, 1, 1}, yt(4, 1.0);
  k.gemv_t_acc(m.flat().data(), 3, 4, xt.data(), yt.data());
  CHECK(yt == Vector{13, 16, 19, 22});
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const auto* avx = simd::avx2_kernels();
  if (!avx || !simd::cpu_supports_avx2()) {
    MESSAGE("AVX2 kernels unavailable on this host; equivalence not exercised");
    return;
  }
  const auto& sc = simd::scalar_kernels();
  std::mt19937_64 rng(7);
  for (std::size_t n : {0, 1, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 67, 300, 331}) {
    CAPTURE(n);
    const auto a = testing::random_vector(n, rng), b = testing::random_vector(n, rng);
    close(avx->dot(a.data(), b.data(), n), sc.dot(a.data(), b.data(), n), abs_sum(a, b));

    auto y1 = testing::random_vector(n, rng);
    auto y2 = y1;
    sc.axpy(0.37, a.data(), y1.data(), n);
    avx->axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) close(y1[i], y2[i], std::abs(y1[i]));

    for (std::size_t rows : {1, 3, 8}) {
      Matrix m(rows, n);
      for (double& v : m.flat()) v = std::normal_distribution<double>()(rng);
      Vector g1(rows), g2(rows);
      sc.gemv(m.flat().data(), rows, n, a.data(), g1.data());
      avx->gemv(m.flat().data(), rows, n, a.data(), g2.data());
      for (std::size_t r = 0; r < rows; ++r) close(g1[r], g2[r], 10.0 * std::sqrt(double(n)));

      const auto xr = testing::random_vector(rows, rng);
      auto t1 = b, t2 = b;
      sc.gemv_t_acc(m.flat().data(), rows, n, xr.data(), t1.data());
      avx->gemv_t_acc(m.flat().data(), rows, n, xr.data(), t2.data());
      for (std::size_t c = 0; c < n; ++c) close(t1[c], t2[c], 10.0 * double(rows));

      Matrix m1 = m, m2 = m;
      sc.ger(-0.5, xr.data(), rows, a.data(), n, m1.flat().data());
      avx->ger(-0.5, xr.data(), rows, a.data(), n, m2.flat().data());
      for (std::size_t i = 0; i < m1.size(); ++i) close(m1.flat()[i], m2.flat()[i], 10.0);
    }

    auto p1 = testing::random_vector(n, rng), m1 = testing::random_vector(n, rng, 0.1);
    auto v1 = testing::random_vector(n, rng, 0.1);
    for (double& v : v1) v = v * v;
    auto p2 = p1, m2 = m1, v2 = v1;
    const simd::AdamStep s{1e-3, 0.9, 0.999, 1e-8, 1.0 - 0.9 * 0.9, 1.0 - 0.999 * 0.999};
    sc.adam(p1.data(), b.data(), m1.data(), v1.data(), n, s);
    avx->adam(p2.data(), b.data(), m2.data(), v2.data(), n, s);
    for (std::size_t i = 0; i < n; ++i) {
      close(p1[i], p2[i], std::abs(p1[i]));
      close(m1[i], m2[i], std::abs(m1[i]));
      close(v1[i], v2[i], std::abs(v1[i]));
    }
  }
}

TEST_CASE("backend switching") {
  const auto before = simd::active_backend();
  simd::set_backend(simd::Backend::kScalar);
  CHECK(simd::active_backend() == simd::Backend::kScalar);
  CHECK(simd::backend_name(simd::Backend::kScalar) == "scalar");
  if (!simd::avx2_kernels() || !simd::cpu_supports_avx2()) {
    CHECK_THROWS_AS(simd::set_backend(simd::Backend::kAvx2), InputError);
  } else {
    simd::set_backend(simd::Backend::kAvx2);
    CHECK(simd::active_backend() == simd::Backend::kAvx2);
  }
  simd::set_backend(before);
}

TEST_CASE("span wrappers check lengths") {
  Vector a(3), b(4);
  CHECK_THROWS_AS(simd::dot(a, b), InputError);
  Matrix m(2, 3);
  Vector y(3);
  CHECK_THROWS_AS(simd::gemv(m, a, y), InputError);
}
