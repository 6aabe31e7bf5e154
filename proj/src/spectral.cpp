#include "sinkflow/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "sinkflow/error.hpp"

namespace sinkflow {

Matrix orthogonal_complement(std::span<const double> w) {
  const std::size_t k = w.size();
  const double norm = norm2(w);
  if (!(norm > 0.0)) throw Error(ErrorCode::BadArguments, "complement of a zero vector");
  std::vector<double> v(w.begin(), w.end());
  for (double& x : v) x /= norm;
  v[0] += v[0] >= 0.0 ? 1.0 : -1.0;
  const double vv = dot(v, v);
  Matrix out(k, k - 1);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = 1; c < k; ++c)
      out(i, c - 1) = (i == c ? 1.0 : 0.0) - 2.0 * v[i] * v[c] / vv;
  return out;
}

namespace {

void require_rate_size(const Coupling& pi) {
  if (pi.rows() * pi.cols() > kMaxRateCells)
    throw Error(ErrorCode::SizeLimit, "contraction rates need n*m <= 4096");
}

// Per-source blocks of a ker Q basis; block x is m x (m - 1).
std::vector<Matrix> unweighted_blocks(const Coupling& pi) {
  std::vector<Matrix> blocks;
  blocks.reserve(pi.rows());
  std::vector<double> w(pi.cols());
  for (std::size_t i = 0; i < pi.rows(); ++i) {
    for (std::size_t j = 0; j < pi.cols(); ++j) w[j] = pi(i, j) / pi.row_marginal()[i];
    blocks.push_back(orthogonal_complement(w));
  }
  return blocks;
}

// Blocks in the coordinates eta = sqrt(pi) xi, where the L2(pi) form is unweighted.
std::vector<Matrix> sqrt_weighted_blocks(const Coupling& pi) {
  std::vector<Matrix> blocks;
  blocks.reserve(pi.rows());
  std::vector<double> w(pi.cols());
  for (std::size_t i = 0; i < pi.rows(); ++i) {
    for (std::size_t j = 0; j < pi.cols(); ++j) w[j] = std::sqrt(pi(i, j));
    blocks.push_back(orthogonal_complement(w));
  }
  return blocks;
}

Matrix assemble(const std::vector<Matrix>& blocks, std::size_t m) {
  const std::size_t n = blocks.size();
  Matrix out(n * m, n * (m - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k + 1 < m; ++k) out(i * m + j, i * (m - 1) + k) = blocks[i](j, k);
  return out;
}

// B^T S B for block-diagonal B (blocks indexed by x) and S coupling only
// equal-y entries, S[(x', y), (x, y)] = kernel(y, x', x).
template <class Kernel>
Matrix reduce_form(const std::vector<Matrix>& blocks, std::size_t m, Kernel&& kernel) {
  const std::size_t n = blocks.size();
  const std::size_t d = m - 1;
  Matrix out(n * d, n * d);
  for (std::size_t xp = 0; xp < n; ++xp)
    for (std::size_t x = 0; x <= xp; ++x)
      for (std::size_t kp = 0; kp < d; ++kp)
        for (std::size_t k = 0; k < d; ++k) {
          double s = 0.0;
          for (std::size_t y = 0; y < m; ++y)
            s += blocks[xp](y, kp) * kernel(y, xp, x) * blocks[x](y, k);
          out(xp * d + kp, x * d + k) = s;
          out(x * d + k, xp * d + kp) = s;
        }
  return out;
}

double block_defect(const Coupling& pi, const std::vector<Matrix>& blocks, bool sqrt_coords) {
  double worst = 0.0;
  for (std::size_t i = 0; i < pi.rows(); ++i)
    for (std::size_t k = 0; k + 1 < pi.cols(); ++k) {
      double q = 0.0;
      for (std::size_t j = 0; j < pi.cols(); ++j) {
        const double xi = sqrt_coords ? blocks[i](j, k) / std::sqrt(pi(i, j)) : blocks[i](j, k);
        q += xi * pi(i, j) / pi.row_marginal()[i];
      }
      worst = std::max(worst, std::abs(q));
    }
  return worst;
}

}  // namespace

Matrix ker_q_basis(const Coupling& pi) { return assemble(unweighted_blocks(pi), pi.cols()); }

Matrix ker_q_basis_weighted(const Coupling& pi) {
  Matrix basis = assemble(sqrt_weighted_blocks(pi), pi.cols());
  for (std::size_t i = 0; i < pi.rows(); ++i)
    for (std::size_t j = 0; j < pi.cols(); ++j) {
      const double scale = 1.0 / std::sqrt(pi(i, j));
      for (double& v : basis.row(i * pi.cols() + j)) v *= scale;
    }
  return basis;
}

double ker_q_defect(const Coupling& pi, const Matrix& basis) {
  const std::size_t m = pi.cols();
  if (basis.rows() != pi.rows() * m) throw Error(ErrorCode::ShapeMismatch, "ker Q basis");
  double worst = 0.0;
  for (std::size_t c = 0; c < basis.cols(); ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < pi.rows(); ++i) {
      double q = 0.0;
      for (std::size_t j = 0; j < m; ++j) q += basis(i * m + j, c) * pi(i, j) / pi.row_marginal()[i];
      s += q * q;
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

PoincareResult poincare_analysis(const OperatorBundle& bundle) {
  const std::size_t m = bundle.m();
  PoincareResult out;
  if (m < 2) return out;
  const auto& piy = bundle.pi_y();
  const Matrix& t = bundle.markov();
  std::vector<double> root(m);
  for (std::size_t j = 0; j < m; ++j) root[j] = std::sqrt(piy[j]);
  Matrix s(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k) s(j, k) = root[j] * t(j, k) / root[k];
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < j; ++k) s(j, k) = s(k, j) = 0.5 * (s(j, k) + s(k, j));

  const Matrix basis = orthogonal_complement(root);
  const Matrix reduced = multiply(basis.transposed(), multiply(s, basis));
  Matrix sym = reduced;
  for (std::size_t j = 0; j < sym.rows(); ++j)
    for (std::size_t k = 0; k < j; ++k) sym(j, k) = sym(k, j) = 0.5 * (sym(j, k) + sym(k, j));
  const SymmetricEigen eig = jacobi_eigen(sym);
  const std::size_t top = eig.values.size() - 1;
  // T is positive semi-definite on L2(pi^Y); tiny negative values are rounding.
  out.constant = std::max(0.0, eig.values[top]);
  out.residual = eig.max_residual;
  out.extremal.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double v = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) v += basis(j, k) * eig.vectors(k, top);
    out.extremal[j] = v / root[j];
  }
  return out;
}

double poincare_constant(const OperatorBundle& bundle) { return poincare_analysis(bundle).constant; }

double variance(std::span<const double> g, const DiscreteMeasure& rho) {
  if (g.size() != rho.size()) throw Error(ErrorCode::ShapeMismatch, "variance");
  double mean = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) mean += rho[j] * g[j];
  double var = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) var += rho[j] * (g[j] - mean) * (g[j] - mean);
  return var;
}

PoincareCheck poincare_check(const OperatorBundle& bundle, std::span<const double> g,
                             double constant) {
  PoincareCheck out;
  out.lhs = dirichlet(bundle, g, g);
  out.rhs = (1.0 - constant) * variance(g, bundle.pi_y());
  out.ok = out.lhs >= out.rhs - kPoincareSlack;
  return out;
}

PoincareCheck poincare_check(const OperatorBundle& bundle, std::span<const double> g) {
  return poincare_check(bundle, g, poincare_constant(bundle));
}

RateResult rate_theorem1(const Coupling& pi) {
  require_rate_size(pi);
  const std::size_t m = pi.cols();
  RateResult out;
  if (m < 2) throw Error(ErrorCode::BadArguments, "ker Q is trivial when m = 1");
  const auto blocks = unweighted_blocks(pi);
  const auto& piy = pi.col_marginal();
  const Matrix form = reduce_form(blocks, m, [&](std::size_t y, std::size_t xp, std::size_t x) {
    return 0.5 * (pi(x, y) + pi(xp, y)) / piy[y];
  });
  const SymmetricEigen eig = jacobi_eigen(form);
  out.rate = eig.values.front();
  out.residual = eig.max_residual;
  out.basis_defect = block_defect(pi, blocks, false);
  return out;
}

RateResult rate_theorem2(const Coupling& pi, const DiscreteMeasure& nu) {
  require_rate_size(pi);
  const std::size_t m = pi.cols();
  if (nu.size() != m) throw Error(ErrorCode::ShapeMismatch, "rate_theorem2");
  if (m < 2) throw Error(ErrorCode::BadArguments, "ker Q is trivial when m = 1");
  const auto g = log_ratio(pi.col_marginal().masses(), nu.masses());
  const Matrix f = centered_given_x(pi, g);
  const auto blocks = sqrt_weighted_blocks(pi);
  const auto& piy = pi.col_marginal();
  const Matrix form = reduce_form(blocks, m, [&](std::size_t y, std::size_t xp, std::size_t x) {
    double v = 2.0 * std::sqrt(pi(x, y) * pi(xp, y)) / piy[y];
    if (x == xp) v += f(x, y);
    return v;
  });
  const SymmetricEigen eig = jacobi_eigen(form);
  RateResult out;
  out.rate = eig.values.front();
  out.residual = eig.max_residual;
  out.basis_defect = block_defect(pi, blocks, true);
  return out;
}

SpectralReport spectral_report(const Coupling& pi, const DiscreteMeasure& nu, bool with_rates) {
  SpectralReport out;
  const OperatorBundle bundle(pi);
  const PoincareResult p = poincare_analysis(bundle);
  out.poincare_c = p.constant;
  out.gap = 1.0 - p.constant;
  out.max_residual = p.residual;
  if (with_rates && pi.rows() * pi.cols() <= kMaxRateCells && pi.cols() >= 2) {
    const RateResult r1 = rate_theorem1(pi);
    const RateResult r2 = rate_theorem2(pi, nu);
    out.rate1 = r1.rate;
    out.rate2 = r2.rate;
    out.max_residual = std::max({out.max_residual, r1.residual, r2.residual});
  }
  return out;
}

}  // namespace sinkflow
