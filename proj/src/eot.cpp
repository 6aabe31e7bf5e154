#include "sinkflow/eot.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "sinkflow/error.hpp"

namespace sinkflow {

Problem Problem::make(Matrix cost, double epsilon, DiscreteMeasure mu, DiscreteMeasure nu) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::BadArguments, "epsilon must be positive");
  if (cost.rows() != mu.size() || cost.cols() != nu.size())
    throw Error(ErrorCode::ShapeMismatch, "cost shape does not match marginals");
  for (double c : cost.data())
    if (!(c >= 0.0) || !std::isfinite(c))
      throw Error(ErrorCode::BadArguments, "cost entries must be finite and nonnegative");
  return Problem{std::move(cost), epsilon, std::move(mu), std::move(nu)};
}

Matrix gibbs_log_kernel(const Problem& problem) {
  Matrix out(problem.n(), problem.m());
  for (std::size_t i = 0; i < problem.n(); ++i) {
    const double lmu = std::log(problem.mu[i]);
    for (std::size_t j = 0; j < problem.m(); ++j)
      out(i, j) = -problem.cost(i, j) / problem.epsilon + lmu + std::log(problem.nu[j]);
  }
  return out;
}

Coupling gibbs_init(const Problem& problem) {
  Matrix table = gibbs_log_kernel(problem);
  const double top = *std::max_element(table.data().begin(), table.data().end());
  double z = 0.0;
  for (double& v : table.data()) {
    v = std::exp(v - top);
    z += v;
  }
  for (double& v : table.data()) {
    v /= z;
    if (v < DBL_MIN)
      throw Error(ErrorCode::Underflow,
                  "Gibbs kernel underflows; epsilon too small for the cost range");
  }
  return Coupling::validated(std::move(table));
}

double primal_objective(const Coupling& pi, const Problem& problem) {
  if (!pi.table().same_shape(problem.cost))
    throw Error(ErrorCode::ShapeMismatch, "coupling does not match cost");
  double transport = 0.0;
  double entropy = 0.0;
  for (std::size_t i = 0; i < pi.rows(); ++i)
    for (std::size_t j = 0; j < pi.cols(); ++j) {
      const double p = pi(i, j);
      transport += p * problem.cost(i, j);
      entropy += p * std::log(p / (problem.mu[i] * problem.nu[j]));
    }
  return transport + problem.epsilon * entropy;
}

double dual_objective(const Potentials& potentials, const Problem& problem) {
  if (potentials.f.size() != problem.n() || potentials.g.size() != problem.m())
    throw Error(ErrorCode::ShapeMismatch, "potentials do not match problem");
  const double eps = problem.epsilon;
  double linear = 0.0;
  for (std::size_t i = 0; i < problem.n(); ++i) linear += problem.mu[i] * potentials.f[i] / eps;
  for (std::size_t j = 0; j < problem.m(); ++j) linear += problem.nu[j] * potentials.g[j] / eps;
  double penalty = 0.0;
  for (std::size_t i = 0; i < problem.n(); ++i)
    for (std::size_t j = 0; j < problem.m(); ++j) {
      const double e =
          std::exp((potentials.f[i] + potentials.g[j] - problem.cost(i, j)) / eps);
      if (!std::isfinite(e))
        throw Error(ErrorCode::Overflow, "dual exponent overflows; potentials invalid");
      penalty += problem.mu[i] * problem.nu[j] * e;
    }
  return linear - penalty;
}

Potentials potentials_from_scalings(std::span<const double> u, std::span<const double> v,
                                    double epsilon) {
  Potentials out{std::vector<double>(u.size()), std::vector<double>(v.size())};
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0)) throw Error(ErrorCode::ZeroMass, "row scaling not positive");
    out.f[i] = epsilon * std::log(u[i]);
  }
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!(v[j] > 0.0)) throw Error(ErrorCode::ZeroMass, "column scaling not positive");
    out.g[j] = epsilon * std::log(v[j]);
  }
  return out;
}

}  // namespace sinkflow
