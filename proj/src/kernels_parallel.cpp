#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "sinkflow/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sinkflow::kernels {

namespace {
// Below this many cells the fork/join overhead dominates.
constexpr std::ptrdiff_t kMinParallelWork = 1 << 14;
// Column kernels walk rows in strips this wide to stay cache friendly.
constexpr std::ptrdiff_t kColumnBlock = 64;

std::ptrdiff_t as_signed(std::size_t n) { return static_cast<std::ptrdiff_t>(n); }
}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace parallel {

void row_sums(const Matrix& a, std::span<double> out) {
  const std::ptrdiff_t n = as_signed(a.rows());
  const std::ptrdiff_t m = as_signed(a.cols());
#pragma omp parallel for schedule(static) if (n * m > kMinParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::ptrdiff_t j = 0; j < m; ++j) s += a(i, j);
    out[i] = s;
  }
}

void col_sums(const Matrix& a, std::span<double> out) {
  const std::ptrdiff_t n = as_signed(a.rows());
  const std::ptrdiff_t m = as_signed(a.cols());
  const std::ptrdiff_t blocks = (m + kColumnBlock - 1) / kColumnBlock;
#pragma omp parallel for schedule(static) if (n * m > kMinParallelWork)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::ptrdiff_t lo = b * kColumnBlock, hi = std::min(m, lo + kColumnBlock);
    for (std::ptrdiff_t j = lo; j < hi; ++j) out[j] = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i)
      for (std::ptrdiff_t j = lo; j < hi; ++j) out[j] += a(i, j);
  }
}

void scale_rows(Matrix& a, std::span<const double> factors) {
  const std::ptrdiff_t n = as_signed(a.rows());
  const std::ptrdiff_t m = as_signed(a.cols());
#pragma omp parallel for schedule(static) if (n * m > kMinParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = 0; j < m; ++j) a(i, j) *= factors[i];
}

void scale_cols(Matrix& a, std::span<const double> factors) {
  const std::ptrdiff_t n = as_signed(a.rows());
  const std::ptrdiff_t m = as_signed(a.cols());
#pragma omp parallel for schedule(static) if (n * m > kMinParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = 0; j < m; ++j) a(i, j) *= factors[j];
}

void mirror_rows(const Matrix& base, std::span<const double> h, std::span<const double> mu,
                 Matrix& out) {
  const std::ptrdiff_t n = as_signed(base.rows());
  const std::ptrdiff_t m = as_signed(base.cols());
  const double hmax = *std::max_element(h.begin(), h.end());
#pragma omp parallel for schedule(static) if (n * m > kMinParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (std::ptrdiff_t j = 0; j < m; ++j) {
      out(i, j) = base(i, j) * std::exp(h[j] - hmax);
      z += out(i, j);
    }
    const double scale = mu[i] / z;
    for (std::ptrdiff_t j = 0; j < m; ++j) out(i, j) *= scale;
  }
}

void logsumexp_rows(const Matrix& a, std::span<const double> shift, std::span<double> out) {
  const std::ptrdiff_t n = as_signed(a.rows());
  const std::ptrdiff_t m = as_signed(a.cols());
#pragma omp parallel for schedule(static) if (n * m > kMinParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::ptrdiff_t j = 0; j < m; ++j) mx = std::max(mx, a(i, j) + shift[j]);
    double s = 0.0;
    for (std::ptrdiff_t j = 0; j < m; ++j) s += std::exp(a(i, j) + shift[j] - mx);
    out[i] = mx + std::log(s);
  }
}

void logsumexp_cols(const Matrix& a, std::span<const double> shift, std::span<double> out) {
  const std::ptrdiff_t n = as_signed(a.rows());
  const std::ptrdiff_t m = as_signed(a.cols());
  const std::ptrdiff_t blocks = (m + kColumnBlock - 1) / kColumnBlock;
#pragma omp parallel for schedule(static) if (n * m > kMinParallelWork)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::ptrdiff_t lo = b * kColumnBlock, hi = std::min(m, lo + kColumnBlock);
    double mx[kColumnBlock];
    double s[kColumnBlock];
    for (std::ptrdiff_t j = lo; j < hi; ++j) {
      mx[j - lo] = -std::numeric_limits<double>::infinity();
      s[j - lo] = 0.0;
    }
    for (std::ptrdiff_t i = 0; i < n; ++i)
      for (std::ptrdiff_t j = lo; j < hi; ++j) mx[j - lo] = std::max(mx[j - lo], a(i, j) + shift[i]);
    for (std::ptrdiff_t i = 0; i < n; ++i)
      for (std::ptrdiff_t j = lo; j < hi; ++j) s[j - lo] += std::exp(a(i, j) + shift[i] - mx[j - lo]);
    for (std::ptrdiff_t j = lo; j < hi; ++j) out[j] = mx[j - lo] + std::log(s[j - lo]);
  }
}

void weighted_row_sums(const Matrix& weights, const Matrix& f, std::span<double> out) {
  const std::ptrdiff_t n = as_signed(f.rows());
  const std::ptrdiff_t m = as_signed(f.cols());
#pragma omp parallel for schedule(static) if (n * m > kMinParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::ptrdiff_t j = 0; j < m; ++j) s += weights(i, j) * f(i, j);
    out[i] = s;
  }
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::ptrdiff_t n = as_signed(a.rows());
  const std::ptrdiff_t inner = as_signed(a.cols());
  const std::ptrdiff_t m = as_signed(b.cols());
#pragma omp parallel for schedule(static) if (n * inner * m > kMinParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = 0; j < m; ++j) out(i, j) = 0.0;
    for (std::ptrdiff_t k = 0; k < inner; ++k) {
      const double aik = a(i, k);
      for (std::ptrdiff_t j = 0; j < m; ++j) out(i, j) += aik * b(k, j);
    }
  }
}

}  // namespace parallel
}  // namespace sinkflow::kernels
