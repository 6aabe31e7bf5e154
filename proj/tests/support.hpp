#pragma once

#include <cmath>
#include <vector>

#include "sinkflow/eot.hpp"
#include "sinkflow/measures.hpp"
#include "sinkflow/rng.hpp"

namespace testing {

inline sinkflow::DiscreteMeasure random_measure(sinkflow::CounterRng& rng, std::size_t n,
                                                double lo = 0.1) {
  std::vector<double> w(n);
  for (double& v : w) v = rng.uniform(lo, 1.0);
  return sinkflow::DiscreteMeasure::normalized(std::move(w));
}

inline sinkflow::Coupling random_coupling(sinkflow::CounterRng& rng, std::size_t n, std::size_t m,
                                          double lo = 0.05) {
  sinkflow::Matrix a(n, m);
  double total = 0.0;
  for (double& v : a.data()) total += (v = rng.uniform(lo, 1.0));
  for (double& v : a.data()) v /= total;
  return sinkflow::Coupling::validated(std::move(a));
}

inline sinkflow::Problem random_problem(sinkflow::CounterRng& rng, std::size_t n, std::size_t m,
                                        double epsilon) {
  sinkflow::Matrix c(n, m);
  for (double& v : c.data()) v = rng.uniform();
  auto mu = random_measure(rng, n);
  auto nu = random_measure(rng, m);
  return sinkflow::Problem::make(std::move(c), epsilon, std::move(mu), std::move(nu));
}

inline std::vector<double> random_vector(sinkflow::CounterRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

inline sinkflow::Matrix random_table(sinkflow::CounterRng& rng, std::size_t n, std::size_t m) {
  sinkflow::Matrix a(n, m);
  for (double& v : a.data()) v = rng.normal();
  return a;
}

/// Signed table with vanishing row sums.
inline sinkflow::Perturbation random_tangent(sinkflow::CounterRng& rng, std::size_t n,
                                             std::size_t m, double scale) {
  sinkflow::Matrix d(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (double& v : d.row(i)) mean += (v = rng.uniform(-1.0, 1.0));
    mean /= static_cast<double>(m);
    for (double& v : d.row(i)) v = scale * (v - mean);
  }
  return sinkflow::Perturbation::validated(std::move(d));
}

/// Uniform marginals, cost b(y) depending on y only, so the Gibbs coupling and
/// the whole flow stay of product form mu x rho_t.
inline sinkflow::Problem product_family(const std::vector<double>& b, std::size_t n,
                                        double epsilon = 1.0) {
  sinkflow::Matrix c(n, b.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c(i, j) = b[j];
  return sinkflow::Problem::make(std::move(c), epsilon, sinkflow::DiscreteMeasure::uniform(n),
                                 sinkflow::DiscreteMeasure::uniform(b.size()));
}

}  // namespace testing
