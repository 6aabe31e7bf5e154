#include "sinkflow/operators.hpp"

#include "sinkflow/error.hpp"
#include "sinkflow/kernels.hpp"

namespace sinkflow {

OperatorBundle::OperatorBundle(Coupling pi) : pi_(std::move(pi)) {
  const std::size_t n = pi_.rows();
  const std::size_t m = pi_.cols();
  if (n * m > kMaxDenseCells || m * m > kMaxDenseCells)
    throw Error(ErrorCode::SizeLimit, "coupling too large for dense operators");
  const auto& row = pi_.row_marginal();
  const auto& col = pi_.col_marginal();
  cond_y_given_x_ = Matrix(n, m);
  cond_x_given_y_ = Matrix(m, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      cond_y_given_x_(i, j) = pi_(i, j) / row[i];
      cond_x_given_y_(j, i) = pi_(i, j) / col[j];
    }
  markov_ = Matrix(m, m);
  kernels::parallel::matmul(cond_x_given_y_, cond_y_given_x_, markov_);
}

OperatorBundle build_bundle(const Coupling& pi) { return OperatorBundle(pi); }

Matrix lift_y(std::span<const double> g, std::size_t n) {
  Matrix out(n, g.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < g.size(); ++j) out(i, j) = g[j];
  return out;
}

Matrix lift_x(std::span<const double> f, std::size_t m) {
  Matrix out(f.size(), m);
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < m; ++j) out(i, j) = f[i];
  return out;
}

std::vector<double> conditional_mean_given_x(const Coupling& pi, const Matrix& f) {
  if (!f.same_shape(pi.table())) throw Error(ErrorCode::ShapeMismatch, "Q applied to table");
  std::vector<double> out(pi.rows());
  kernels::parallel::weighted_row_sums(pi.table(), f, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= pi.row_marginal()[i];
  return out;
}

std::vector<double> conditional_mean_given_y(const Coupling& pi, const Matrix& f) {
  if (!f.same_shape(pi.table())) throw Error(ErrorCode::ShapeMismatch, "P applied to table");
  std::vector<double> out(pi.cols(), 0.0);
  for (std::size_t i = 0; i < pi.rows(); ++i)
    for (std::size_t j = 0; j < pi.cols(); ++j) out[j] += pi(i, j) * f(i, j);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] /= pi.col_marginal()[j];
  return out;
}

Matrix apply_Q(const OperatorBundle& bundle, const Matrix& f) {
  if (!f.same_shape(bundle.coupling().table()))
    throw Error(ErrorCode::ShapeMismatch, "Q applied to table");
  std::vector<double> q(bundle.n());
  kernels::parallel::weighted_row_sums(bundle.cond_y_given_x(), f, q);
  return lift_x(q, bundle.m());
}

Matrix apply_P(const OperatorBundle& bundle, const Matrix& f) {
  if (!f.same_shape(bundle.coupling().table()))
    throw Error(ErrorCode::ShapeMismatch, "P applied to table");
  const Matrix& cx = bundle.cond_x_given_y();
  std::vector<double> p(bundle.m());
  for (std::size_t j = 0; j < bundle.m(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < bundle.n(); ++i) s += f(i, j) * cx(j, i);
    p[j] = s;
  }
  return lift_y(p, bundle.n());
}

std::vector<double> apply_T(const OperatorBundle& bundle, std::span<const double> g) {
  if (g.size() != bundle.m()) throw Error(ErrorCode::ShapeMismatch, "T applied to vector");
  return multiply(bundle.markov(), g);
}

Matrix centered_given_x(const Coupling& pi, std::span<const double> g) {
  if (g.size() != pi.cols()) throw Error(ErrorCode::ShapeMismatch, "(I - Q) g");
  Matrix out = lift_y(g, pi.rows());
  const auto q = conditional_mean_given_x(pi, out);
  for (std::size_t i = 0; i < pi.rows(); ++i)
    for (double& v : out.row(i)) v -= q[i];
  return out;
}

double inner(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, "inner product");
  return dot(a.data(), b.data());
}

double inner(const Matrix& a, const Matrix& b, const Coupling& pi) {
  if (!a.same_shape(b) || !a.same_shape(pi.table()))
    throw Error(ErrorCode::ShapeMismatch, "weighted inner product");
  double s = 0.0;
  const auto w = pi.table().data();
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * a.data()[k] * b.data()[k];
  return s;
}

double inner(std::span<const double> f, std::span<const double> g, const DiscreteMeasure& rho) {
  if (f.size() != rho.size() || g.size() != rho.size())
    throw Error(ErrorCode::ShapeMismatch, "weighted inner product");
  double s = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) s += rho[j] * f[j] * g[j];
  return s;
}

double dirichlet(const OperatorBundle& bundle, std::span<const double> f,
                 std::span<const double> g) {
  if (f.size() != bundle.m() || g.size() != bundle.m())
    throw Error(ErrorCode::ShapeMismatch, "Dirichlet form");
  const auto tg = apply_T(bundle, g);
  double s = 0.0;
  for (std::size_t j = 0; j < bundle.m(); ++j) s += bundle.pi_y()[j] * f[j] * (g[j] - tg[j]);
  return s;
}

double entropy_production(const Coupling& pi, const DiscreteMeasure& nu) {
  if (nu.size() != pi.cols()) throw Error(ErrorCode::ShapeMismatch, "entropy production");
  const auto g = log_ratio(pi.col_marginal().masses(), nu.masses());
  const Matrix centered = centered_given_x(pi, g);
  return inner(centered, centered, pi);
}

double entropy_production_dirichlet(const OperatorBundle& bundle, const DiscreteMeasure& nu) {
  if (nu.size() != bundle.m()) throw Error(ErrorCode::ShapeMismatch, "entropy production");
  const auto g = log_ratio(bundle.pi_y().masses(), nu.masses());
  return dirichlet(bundle, g, g);
}

double fisher_information(const OperatorBundle& bundle, const DiscreteMeasure& omega,
                          const DiscreteMeasure& nu) {
  if (omega.size() != bundle.m() || nu.size() != bundle.m())
    throw Error(ErrorCode::ShapeMismatch, "Fisher information");
  const auto g = log_ratio(omega.masses(), nu.masses());
  return dirichlet(bundle, g, g);
}

double fisher_information(const Coupling& pi, const DiscreteMeasure& omega,
                          const DiscreteMeasure& nu) {
  return fisher_information(OperatorBundle(pi), omega, nu);
}

std::vector<double> onsager_rhs(const OperatorBundle& bundle, const DiscreteMeasure& nu) {
  if (nu.size() != bundle.m()) throw Error(ErrorCode::ShapeMismatch, "Onsager form");
  const auto g = log_ratio(bundle.pi_y().masses(), nu.masses());
  const auto tg = apply_T(bundle, g);
  std::vector<double> out(bundle.m());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = -bundle.pi_y()[j] * (g[j] - tg[j]);
  return out;
}

std::vector<double> onsager_rhs(const Coupling& pi, const DiscreteMeasure& nu) {
  return onsager_rhs(OperatorBundle(pi), nu);
}

}  // namespace sinkflow
