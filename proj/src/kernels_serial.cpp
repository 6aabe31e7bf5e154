#include <algorithm>
#include <cmath>
#include <limits>

#include "sinkflow/kernels.hpp"

namespace sinkflow::kernels::serial {

void row_sums(const Matrix& a, std::span<double> out) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double v : a.row(i)) s += v;
    out[i] = s;
  }
}

void col_sums(const Matrix& a, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += r[j];
  }
}

void scale_rows(Matrix& a, std::span<const double> factors) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (double& v : a.row(i)) v *= factors[i];
}

void scale_cols(Matrix& a, std::span<const double> factors) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) r[j] *= factors[j];
  }
}

void mirror_rows(const Matrix& base, std::span<const double> h, std::span<const double> mu,
                 Matrix& out) {
  const double hmax = *std::max_element(h.begin(), h.end());
  for (std::size_t i = 0; i < base.rows(); ++i) {
    const auto b = base.row(i);
    auto o = out.row(i);
    double z = 0.0;
    for (std::size_t j = 0; j < base.cols(); ++j) {
      o[j] = b[j] * std::exp(h[j] - hmax);
      z += o[j];
    }
    const double scale = mu[i] / z;
    for (double& v : o) v *= scale;
  }
}

void logsumexp_rows(const Matrix& a, std::span<const double> shift, std::span<double> out) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, r[j] + shift[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::exp(r[j] + shift[j] - m);
    out[i] = m + std::log(s);
  }
}

void logsumexp_cols(const Matrix& a, std::span<const double> shift, std::span<double> out) {
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.rows(); ++i) m = std::max(m, a(i, j) + shift[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::exp(a(i, j) + shift[i] - m);
    out[j] = m + std::log(s);
  }
}

void weighted_row_sums(const Matrix& weights, const Matrix& f, std::span<double> out) {
  for (std::size_t i = 0; i < f.rows(); ++i) {
    const auto w = weights.row(i);
    const auto r = f.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < f.cols(); ++j) s += w[j] * r[j];
    out[i] = s;
  }
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  std::fill(out.data().begin(), out.data().end(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto o = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * bk[j];
    }
  }
}

}  // namespace sinkflow::kernels::serial
