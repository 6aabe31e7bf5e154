#pragma once

#include <span>
#include <vector>

#include "sinkflow/matrix.hpp"
#include "sinkflow/measures.hpp"

namespace sinkflow {

/// Entropic OT instance: nonnegative cost, regularization and both marginals.
struct Problem {
  Matrix cost;
  double epsilon = 1.0;
  DiscreteMeasure mu;
  DiscreteMeasure nu;

  /// Checks epsilon > 0, finite nonnegative costs and matching shapes.
  static Problem make(Matrix cost, double epsilon, DiscreteMeasure mu, DiscreteMeasure nu);

  std::size_t n() const noexcept { return mu.size(); }
  std::size_t m() const noexcept { return nu.size(); }
};

/// Schrödinger potentials (f on the source grid, g on the target grid).
struct Potentials {
  std::vector<double> f;
  std::vector<double> g;
};

/// log of the unnormalized Gibbs kernel: -c/eps + log mu_i + log nu_j.
Matrix gibbs_log_kernel(const Problem& problem);

/// Normalized Gibbs coupling exp(-c/eps) mu nu / Z.
/// Throws Underflow if any cell vanishes in double precision.
Coupling gibbs_init(const Problem& problem);

/// E_pi[c] + eps H(pi | mu x nu).
double primal_objective(const Coupling& pi, const Problem& problem);

/// E_mu[f/eps] + E_nu[g/eps] - E_{mu x nu}[exp((f + g - c)/eps)], as printed.
/// At optimal potentials eps * (dual + 1) equals the primal optimum.
double dual_objective(const Potentials& potentials, const Problem& problem);

/// f = eps log u, g = eps log v.
Potentials potentials_from_scalings(std::span<const double> u, std::span<const double> v,
                                    double epsilon);

}  // namespace sinkflow
