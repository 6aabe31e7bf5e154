#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sinkflow/matrix.hpp"
#include "sinkflow/measures.hpp"
#include "sinkflow/operators.hpp"

namespace sinkflow {

/// Eigen-decomposition of a symmetric matrix; values ascending, vectors as columns.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
  double max_residual = 0.0;  // max_k ||A v_k - lambda_k v_k||
  int sweeps = 0;
};

/// Cyclic Jacobi rotations. Throws EigenFailure if the input is not symmetric,
/// the sweeps do not converge, or any residual exceeds kEigenResidualTolerance.
SymmetricEigen jacobi_eigen(const Matrix& a, int max_sweeps = 100);

inline constexpr double kEigenResidualTolerance = 1e-9;

/// k x (k - 1) matrix whose orthonormal columns span the complement of w,
/// built from the Householder reflection sending w to a multiple of e_0.
Matrix orthogonal_complement(std::span<const double> w);

/// Orthonormal (unweighted) basis of ker Q = {xi : sum_y xi(x, y) pi(y|x) = 0}, in
/// flattened row-major coordinates; n*m rows, n*(m-1) columns.
Matrix ker_q_basis(const Coupling& pi);
/// Basis of ker Q orthonormal in L2(pi).
Matrix ker_q_basis_weighted(const Coupling& pi);

/// Largest column norm of Q applied to the basis columns.
double ker_q_defect(const Coupling& pi, const Matrix& basis);

struct PoincareResult {
  double constant = 0.0;              // C(pi)
  std::vector<double> extremal;       // mean-zero g with <g, T g> = C ||g||^2, ||g|| = 1
  double residual = 0.0;
};

/// Top eigenpair of T restricted to pi^Y-mean-zero functions, through the
/// symmetrization D^{1/2} T D^{-1/2} with D = diag(pi^Y) deflated off sqrt(pi^Y).
PoincareResult poincare_analysis(const OperatorBundle& bundle);
double poincare_constant(const OperatorBundle& bundle);

struct PoincareCheck {
  double lhs = 0.0;  // E(g, g)
  double rhs = 0.0;  // (1 - C) Var(g)
  bool ok = false;
};

inline constexpr double kPoincareSlack = 1e-10;

PoincareCheck poincare_check(const OperatorBundle& bundle, std::span<const double> g);
PoincareCheck poincare_check(const OperatorBundle& bundle, std::span<const double> g,
                             double constant);

double variance(std::span<const double> g, const DiscreteMeasure& rho);

/// Largest n*m for which contraction rates are computed densely.
inline constexpr std::size_t kMaxRateCells = 4096;

struct RateResult {
  double rate = 0.0;
  double residual = 0.0;
  double basis_defect = 0.0;
};

/// inf over unit xi in ker Q of <xi, P xi> in unweighted L2.
RateResult rate_theorem1(const Coupling& pi);
/// inf over xi in ker Q, ||xi||_pi = 1, of <xi, (2P + (I - Q) log(pi^Y/nu)) xi>_pi.
RateResult rate_theorem2(const Coupling& pi, const DiscreteMeasure& nu);

struct SpectralReport {
  double poincare_c = 0.0;
  double gap = 0.0;
  std::optional<double> rate1;
  std::optional<double> rate2;
  double max_residual = 0.0;
};

SpectralReport spectral_report(const Coupling& pi, const DiscreteMeasure& nu,
                               bool with_rates = true);

}  // namespace sinkflow
