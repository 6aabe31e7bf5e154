#pragma once

#include <span>

#include "sinkflow/matrix.hpp"

// Data-parallel inner loops shared by the solvers.
//
// Every kernel exists twice: `serial` is the reference implementation kept for
// testing, `parallel` is the OpenMP version used by the library. Each output
// element is reduced in the same order by both, so results agree bitwise and
// runs stay reproducible regardless of thread count.
namespace sinkflow::kernels {

namespace serial {

void row_sums(const Matrix& a, std::span<double> out);
void col_sums(const Matrix& a, std::span<double> out);
void scale_rows(Matrix& a, std::span<const double> factors);
void scale_cols(Matrix& a, std::span<const double> factors);

/// out(x, y) = mu(x) * base(x, y) * exp(h(y) - max h) / Z(x), rows normalized.
void mirror_rows(const Matrix& base, std::span<const double> h, std::span<const double> mu,
                 Matrix& out);

/// out(i) = log sum_j exp(a(i, j) + shift(j)).
void logsumexp_rows(const Matrix& a, std::span<const double> shift, std::span<double> out);
/// out(j) = log sum_i exp(a(i, j) + shift(i)).
void logsumexp_cols(const Matrix& a, std::span<const double> shift, std::span<double> out);

/// out(i) = sum_j weights(i, j) * f(i, j).
void weighted_row_sums(const Matrix& weights, const Matrix& f, std::span<double> out);

void matmul(const Matrix& a, const Matrix& b, Matrix& out);

}  // namespace serial

namespace parallel {

void row_sums(const Matrix& a, std::span<double> out);
void col_sums(const Matrix& a, std::span<double> out);
void scale_rows(Matrix& a, std::span<const double> factors);
void scale_cols(Matrix& a, std::span<const double> factors);
void mirror_rows(const Matrix& base, std::span<const double> h, std::span<const double> mu,
                 Matrix& out);
void logsumexp_rows(const Matrix& a, std::span<const double> shift, std::span<double> out);
void logsumexp_cols(const Matrix& a, std::span<const double> shift, std::span<double> out);
void weighted_row_sums(const Matrix& weights, const Matrix& f, std::span<double> out);
void matmul(const Matrix& a, const Matrix& b, Matrix& out);

}  // namespace parallel

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

}  // namespace sinkflow::kernels
