#pragma once

#include <span>
#include <vector>

#include "sinkflow/matrix.hpp"
#include "sinkflow/measures.hpp"

namespace sinkflow {

/// Largest coupling (in cells) for which dense operators are materialized.
inline constexpr std::size_t kMaxDenseCells = std::size_t{1} << 22;

/// Dense conditional-expectation operators of a coupling.
///
/// Functions of y alone embed in functions on X x Y as tables constant in x.
/// P conditions on Y, Q conditions on X, and T = PQ restricted to functions
/// of y is a reversible Markov operator with stationary law pi^Y.
class OperatorBundle {
 public:
  explicit OperatorBundle(Coupling pi);

  std::size_t n() const noexcept { return pi_.rows(); }
  std::size_t m() const noexcept { return pi_.cols(); }

  const Coupling& coupling() const noexcept { return pi_; }
  /// n x m, row x holds pi(. | x).
  const Matrix& cond_y_given_x() const noexcept { return cond_y_given_x_; }
  /// m x n, row y holds pi(. | y).
  const Matrix& cond_x_given_y() const noexcept { return cond_x_given_y_; }
  /// m x m, T[y][y'] = sum_x pi(x | y) pi(y' | x).
  const Matrix& markov() const noexcept { return markov_; }
  const DiscreteMeasure& pi_y() const noexcept { return pi_.col_marginal(); }

 private:
  Coupling pi_;
  Matrix cond_y_given_x_;
  Matrix cond_x_given_y_;
  Matrix markov_;
};

OperatorBundle build_bundle(const Coupling& pi);

/// Embeds a function of y as an n x m table constant in x.
Matrix lift_y(std::span<const double> g, std::size_t n);
/// Embeds a function of x as an n x m table constant in y.
Matrix lift_x(std::span<const double> f, std::size_t m);

/// (Q f)(x) = E[f | X = x] as an n-vector.
std::vector<double> conditional_mean_given_x(const Coupling& pi, const Matrix& f);
/// (P f)(y) = E[f | Y = y] as an m-vector.
std::vector<double> conditional_mean_given_y(const Coupling& pi, const Matrix& f);

/// Q f lifted back to X x Y.
Matrix apply_Q(const OperatorBundle& bundle, const Matrix& f);
/// P f lifted back to X x Y.
Matrix apply_P(const OperatorBundle& bundle, const Matrix& f);
std::vector<double> apply_T(const OperatorBundle& bundle, std::span<const double> g);

/// (I - Q) applied to the lift of a function of y.
Matrix centered_given_x(const Coupling& pi, std::span<const double> g);

/// Unweighted sum of a .* b.
double inner(const Matrix& a, const Matrix& b);
/// <a, b> in L2(pi).
double inner(const Matrix& a, const Matrix& b, const Coupling& pi);
/// <f, g> in L2(rho).
double inner(std::span<const double> f, std::span<const double> g, const DiscreteMeasure& rho);

/// E(f, g) = <f, (I - T) g> in L2(pi^Y).
double dirichlet(const OperatorBundle& bundle, std::span<const double> f,
                 std::span<const double> g);

/// ||(I - Q) log(pi^Y / nu)||^2 in L2(pi): the entropy production rate.
double entropy_production(const Coupling& pi, const DiscreteMeasure& nu);
/// Same quantity through the Dirichlet form E(g, g).
double entropy_production_dirichlet(const OperatorBundle& bundle, const DiscreteMeasure& nu);

/// I_pi(omega | nu) = E(log(omega / nu), log(omega / nu)).
double fisher_information(const OperatorBundle& bundle, const DiscreteMeasure& omega,
                          const DiscreteMeasure& nu);
double fisher_information(const Coupling& pi, const DiscreteMeasure& omega,
                          const DiscreteMeasure& nu);

/// Marginal velocity -pi^Y .* (I - T) log(pi^Y / nu).
std::vector<double> onsager_rhs(const OperatorBundle& bundle, const DiscreteMeasure& nu);
std::vector<double> onsager_rhs(const Coupling& pi, const DiscreteMeasure& nu);

}  // namespace sinkflow
