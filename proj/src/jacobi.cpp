#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

#include "sinkflow/error.hpp"
#include "sinkflow/spectral.hpp"

namespace sinkflow {

namespace {

constexpr std::ptrdiff_t kParallelRotationSize = 256;

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Applies the rotation zeroing a(p, q). Rows and columns are updated in place;
// each k touches a disjoint set of entries so the loop parallelizes cleanly.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (std::abs(theta) > 1e150) t = 0.5 / std::abs(theta);
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  const auto sp = static_cast<std::ptrdiff_t>(p);
  const auto sq = static_cast<std::ptrdiff_t>(q);
#pragma omp parallel for schedule(static) if (n > kParallelRotationSize)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    if (k != sp && k != sq) {
      const double akp = a(k, p);
      const double akq = a(k, q);
      a(k, p) = c * akp - s * akq;
      a(k, q) = s * akp + c * akq;
      a(p, k) = a(k, p);
      a(q, k) = a(k, q);
    }
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
}

}  // namespace

SymmetricEigen jacobi_eigen(const Matrix& input, int max_sweeps) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw Error(ErrorCode::ShapeMismatch, "eigensolver needs a square matrix");
  double scale = 0.0;
  for (double x : input.data()) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(input(i, j) - input(j, i)) > 1e-12 * std::max(1.0, scale))
        throw Error(ErrorCode::EigenFailure, "matrix is not symmetric");

  Matrix a = input;
  Matrix v = Matrix::identity(n);
  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  frob = std::sqrt(frob);

  SymmetricEigen out;
  bool converged = n <= 1;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    const double off = off_diagonal_norm(a);
    if (off <= 1e-15 * frob || off == 0.0) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < std::numeric_limits<double>::min()) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        rotate(a, v, p, q);
      }
    out.sweeps = sweep + 1;
  }
  if (!converged && off_diagonal_norm(a) > 1e-15 * frob)
    throw Error(ErrorCode::EigenFailure, "Jacobi sweeps did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }

  for (std::size_t k = 0; k < n; ++k) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = -out.values[k] * out.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) s += input(i, j) * out.vectors(j, k);
      r += s * s;
    }
    out.max_residual = std::max(out.max_residual, std::sqrt(r));
  }
  if (out.max_residual > kEigenResidualTolerance)
    throw Error(ErrorCode::EigenFailure, "eigenpair residual above tolerance");
  return out;
}

}  // namespace sinkflow
