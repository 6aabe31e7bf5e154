#pragma once

// Reference computations that share no code with the library: dense operator
// matrices on X x Y, Eigen decompositions, and a Newton solver for the
// entropic problem. Index convention k = x * m + y.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "sinkflow/eot.hpp"
#include "sinkflow/measures.hpp"

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat table(const sinkflow::Coupling& pi) {
  Mat a(pi.rows(), pi.cols());
  for (std::size_t i = 0; i < pi.rows(); ++i)
    for (std::size_t j = 0; j < pi.cols(); ++j) a(i, j) = pi(i, j);
  return a;
}

inline Vec flat(const sinkflow::Matrix& f) {
  Vec v(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) v(k) = f.data()[k];
  return v;
}

/// (P f)(x, y) = sum_x' pi(x', y) f(x', y) / pi^Y(y).
inline Mat p_matrix(const sinkflow::Coupling& pi) {
  const Mat a = table(pi);
  const long n = a.rows(), m = a.cols();
  const Vec py = a.colwise().sum();
  Mat p = Mat::Zero(n * m, n * m);
  for (long x = 0; x < n; ++x)
    for (long y = 0; y < m; ++y)
      for (long x2 = 0; x2 < n; ++x2) p(x * m + y, x2 * m + y) = a(x2, y) / py(y);
  return p;
}

/// (Q f)(x, y) = sum_y' pi(x, y') f(x, y') / pi^X(x).
inline Mat q_matrix(const sinkflow::Coupling& pi) {
  const Mat a = table(pi);
  const long n = a.rows(), m = a.cols();
  const Vec px = a.rowwise().sum();
  Mat q = Mat::Zero(n * m, n * m);
  for (long x = 0; x < n; ++x)
    for (long y = 0; y < m; ++y)
      for (long y2 = 0; y2 < m; ++y2) q(x * m + y, x * m + y2) = a(x, y2) / px(x);
  return q;
}

/// T on functions of y through the lifted P Q.
inline Mat t_matrix(const sinkflow::Coupling& pi) {
  const long n = pi.rows(), m = pi.cols();
  const Mat pq = p_matrix(pi) * q_matrix(pi);
  // Lift y-functions (x = 0 row of the product acting on lifted inputs).
  Mat t = Mat::Zero(m, m);
  for (long y = 0; y < m; ++y)
    for (long y2 = 0; y2 < m; ++y2)
      for (long x2 = 0; x2 < n; ++x2) t(y, y2) += pq(0 * m + y, x2 * m + y2);
  return t;
}

/// Largest eigenvalue of T other than the stationary 1, from a general
/// (non-symmetric) eigensolve.
inline double poincare(const sinkflow::Coupling& pi) {
  const Mat t = t_matrix(pi);
  Eigen::EigenSolver<Mat> es(t);
  std::vector<double> ev;
  for (long k = 0; k < t.rows(); ++k) ev.push_back(es.eigenvalues()(k).real());
  std::sort(ev.begin(), ev.end());
  return ev.size() < 2 ? 0.0 : std::max(0.0, ev[ev.size() - 2]);
}

/// Orthonormal (unweighted) basis of ker Q from a full SVD of the constraints.
inline Mat kerq_basis(const sinkflow::Coupling& pi) {
  const Mat a = table(pi);
  const long n = a.rows(), m = a.cols();
  Mat c = Mat::Zero(n, n * m);
  for (long x = 0; x < n; ++x)
    for (long y = 0; y < m; ++y) c(x, x * m + y) = a(x, y) / a.row(x).sum();
  Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(n * m - n);
}

/// min over unit xi in ker Q of <xi, P xi>.
inline double rate1(const sinkflow::Coupling& pi) {
  const Mat b = kerq_basis(pi);
  const Mat p = p_matrix(pi);
  const Mat s = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(b.transpose() * s * b);
  return es.eigenvalues().minCoeff();
}

/// min over xi in ker Q of <xi, (2P + f) xi>_pi / <xi, xi>_pi as a generalized problem.
inline double rate2(const sinkflow::Coupling& pi, const sinkflow::DiscreteMeasure& nu) {
  const Mat a = table(pi);
  const long n = a.rows(), m = a.cols();
  const Vec py = a.colwise().sum();
  Vec g(n * m), w(n * m);
  for (long x = 0; x < n; ++x)
    for (long y = 0; y < m; ++y) {
      g(x * m + y) = std::log(py(y) / nu[y]);
      w(x * m + y) = a(x, y);
    }
  const Vec f = g - q_matrix(pi) * g;
  const Mat op = 2.0 * p_matrix(pi) + Mat(f.asDiagonal());
  const Mat form = w.asDiagonal() * op;
  const Mat sym = 0.5 * (form + form.transpose());
  const Mat b = kerq_basis(pi);
  const Mat lhs = b.transpose() * sym * b;
  const Mat rhs = b.transpose() * w.asDiagonal() * b;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(lhs, rhs);
  return es.eigenvalues().minCoeff();
}

/// Deflated power iteration for the second eigenvalue of the symmetrized T.
inline double poincare_power(const sinkflow::Coupling& pi, int iters = 20000) {
  const Mat t = t_matrix(pi);
  const Vec py = table(pi).colwise().sum();
  const Vec sq = py.array().sqrt();
  const Mat s = sq.asDiagonal() * t * sq.cwiseInverse().asDiagonal();
  // Shift by +1 so the dominant remaining eigenvalue is the largest one.
  const Mat shifted = s + Mat::Identity(s.rows(), s.cols());
  const Vec top = sq.normalized();
  Vec v = Vec::LinSpaced(s.rows(), 1.0, 2.0);
  v -= top * top.dot(v);
  v.normalize();
  for (int k = 0; k < iters; ++k) {
    Vec next = shifted * v;
    next -= top * top.dot(next);
    v = next.normalized();
  }
  return std::max(0.0, v.dot(s * v));
}

/// Newton's method on the entropic objective over Pi(mu, nu), from mu x nu,
/// with the marginal constraints enforced through the KKT system and
/// backtracking that keeps every cell positive.
inline Mat newton_eot(const sinkflow::Problem& p, int max_iters = 200) {
  const long n = p.n(), m = p.m(), N = n * m;
  const double eps = p.epsilon;
  Vec ref(N), cost(N), x(N);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j) {
      ref(i * m + j) = p.mu[i] * p.nu[j];
      cost(i * m + j) = p.cost(i, j);
    }
  x = ref;
  // Row constraints plus all but one column constraint (the last is implied).
  const long k = n + m - 1;
  Mat a = Mat::Zero(k, N);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j) {
      a(i, i * m + j) = 1.0;
      if (j < m - 1) a(n + j, i * m + j) = 1.0;
    }
  auto objective = [&](const Vec& v) {
    double s = 0.0;
    for (long q = 0; q < N; ++q) s += v(q) * cost(q) + eps * v(q) * std::log(v(q) / ref(q));
    return s;
  };
  for (int it = 0; it < max_iters; ++it) {
    Vec grad(N), hdiag(N);
    for (long q = 0; q < N; ++q) {
      grad(q) = cost(q) + eps * (std::log(x(q) / ref(q)) + 1.0);
      hdiag(q) = eps / x(q);
    }
    Mat kkt = Mat::Zero(N + k, N + k);
    kkt.topLeftCorner(N, N) = hdiag.asDiagonal();
    kkt.topRightCorner(N, k) = a.transpose();
    kkt.bottomLeftCorner(k, N) = a;
    Vec rhs = Vec::Zero(N + k);
    rhs.head(N) = -grad;
    const Vec sol = kkt.fullPivLu().solve(rhs);
    const Vec d = sol.head(N);
    const double decrement = -grad.dot(d);
    if (decrement < 1e-28) break;
    double step = 1.0;
    while (((x + step * d).array() <= 0.0).any()) step *= 0.5;
    const double f0 = objective(x);
    while (objective(x + step * d) > f0 - 1e-4 * step * decrement && step > 1e-16) step *= 0.5;
    x += step * d;
  }
  Mat out(n, m);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j) out(i, j) = x(i * m + j);
  return out;
}

}  // namespace oracle
