#include <doctest.h>

#include <cmath>

#include "sinkflow/eot.hpp"
#include "sinkflow/error.hpp"
#include "sinkflow/sinkhorn.hpp"
#include "support.hpp"

using namespace sinkflow;

namespace {

Problem symmetric_2x2() {
  return Problem::make(Matrix::from_rows({{0, 1}, {1, 0}}), 1.0, DiscreteMeasure::uniform(2),
                       DiscreteMeasure::uniform(2));
}

}  // namespace

TEST_CASE("Gibbs initialization") {
  CounterRng rng(5);
  const auto mu = testing::random_measure(rng, 3);
  const auto nu = testing::random_measure(rng, 4);
  const auto zero = Problem::make(Matrix(3, 4), 0.7, mu, nu);
  const auto pi0 = gibbs_init(zero);
  const auto prod = product_coupling(mu, nu);
  CHECK(max_abs_diff(pi0.table().data(), prod.table().data()) <= 1e-15);

  const auto sym = gibbs_init(symmetric_2x2());
  const double z = 0.25 * 2.0 * (1.0 + std::exp(-1.0));
  CHECK(sym(0, 0) == doctest::Approx(0.25 / z).epsilon(1e-14));
  CHECK(sym(0, 1) == doctest::Approx(0.25 * std::exp(-1.0) / z).epsilon(1e-14));
  CHECK(sym(0, 0) == doctest::Approx(0.365529).epsilon(1e-6));
  CHECK(sym(1, 0) == doctest::Approx(0.134471).epsilon(1e-5));
  CHECK(sym.row_marginal()[0] == doctest::Approx(0.5));
  CHECK(sym.col_marginal()[1] == doctest::Approx(0.5));

  const auto tiny = Problem::make(Matrix::from_rows({{0, 1}, {1, 0}}), 1e-3,
                                  DiscreteMeasure::uniform(2), DiscreteMeasure::uniform(2));
  CHECK_THROWS_AS(gibbs_init(tiny), Error);
}

TEST_CASE("problem validation") {
  CHECK_THROWS_AS(Problem::make(Matrix(2, 2), 0.0, DiscreteMeasure::uniform(2),
                                DiscreteMeasure::uniform(2)),
                  Error);
  CHECK_THROWS_AS(Problem::make(Matrix::from_rows({{0, -1}, {1, 0}}), 1.0,
                                DiscreteMeasure::uniform(2), DiscreteMeasure::uniform(2)),
                  Error);
  CHECK_THROWS_AS(Problem::make(Matrix(2, 3), 1.0, DiscreteMeasure::uniform(2),
                                DiscreteMeasure::uniform(2)),
                  Error);
}

TEST_CASE("primal objective") {
  CounterRng rng(8);
  const auto p = testing::random_problem(rng, 3, 3, 0.5);
  const auto prod = product_coupling(p.mu, p.nu);
  double expected = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) expected += p.mu[i] * p.nu[j] * p.cost(i, j);
  CHECK(primal_objective(prod, p) == doctest::Approx(expected).epsilon(1e-14));
  const auto zero = Problem::make(Matrix(3, 3), 0.5, p.mu, p.nu);
  CHECK(primal_objective(prod, zero) == doctest::Approx(0.0).epsilon(1e-16));

  // Brute-force summation on the symmetric instance.
  const auto sym = symmetric_2x2();
  const auto pi0 = gibbs_init(sym);
  double brute = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      brute += pi0(i, j) * sym.cost(i, j) + pi0(i, j) * std::log(pi0(i, j) / 0.25);
  CHECK(primal_objective(pi0, sym) == doctest::Approx(brute).epsilon(1e-14));
}

TEST_CASE("dual objective") {
  const Potentials zero{{0.0, 0.0}, {0.0, 0.0}};
  const auto flat = Problem::make(Matrix(2, 2), 1.0, DiscreteMeasure::uniform(2),
                                  DiscreteMeasure::uniform(2));
  CHECK(dual_objective(zero, flat) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(dual_objective(zero, symmetric_2x2()) ==
        doctest::Approx(-(1.0 + std::exp(-1.0)) / 2.0).epsilon(1e-14));
  CHECK(dual_objective(zero, symmetric_2x2()) == doctest::Approx(-0.683940).epsilon(1e-6));
  const Potentials huge{{1e6, 0.0}, {1e6, 0.0}};
  CHECK_THROWS_AS(dual_objective(huge, symmetric_2x2()), Error);
}

TEST_CASE("potentials from scalings") {
  const std::vector<double> one{1.0, 1.0};
  auto p = potentials_from_scalings(one, one, 0.3);
  CHECK(p.f[0] == 0.0);
  CHECK(p.g[1] == 0.0);
  const std::vector<double> e{std::exp(1.0), std::exp(1.0)};
  p = potentials_from_scalings(e, one, 1.0);
  CHECK(p.f[0] == doctest::Approx(1.0).epsilon(1e-15));
  CounterRng rng(2);
  std::vector<double> u(5);
  for (double& v : u) v = rng.uniform(0.1, 10.0);
  p = potentials_from_scalings(u, u, 0.37);
  for (std::size_t k = 0; k < u.size(); ++k)
    CHECK(std::abs(std::exp(p.f[k] / 0.37) - u[k]) <= 1e-14 * u[k]);
  const std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS_AS(potentials_from_scalings(bad, one, 1.0), Error);
}

TEST_CASE("duality offset is calibrated on the zero-cost instance") {
  // cost = 0: pi_* = mu x nu, primal 0, f = g = 0 optimal, dual = -1.
  CounterRng rng(4);
  const auto mu = testing::random_measure(rng, 4);
  const auto nu = testing::random_measure(rng, 4);
  const auto flat = Problem::make(Matrix(4, 4), 0.8, mu, nu);
  const auto s = sinkhorn_solve(flat);
  const double offset = primal_objective(s.coupling, flat) - flat.epsilon * dual_objective(s.potentials, flat);
  CHECK(offset == doctest::Approx(flat.epsilon).epsilon(1e-12));

  for (int k = 0; k < 5; ++k) {
    const auto p = testing::random_problem(rng, 8, 8, 0.3 + 0.2 * k);
    // tol bounds a sum of KL divergences, i.e. squared marginal defects; 1e-20
    // leaves defects near 1e-10 so the gap is dominated by the duality offset.
    SinkhornOptions opt;
    opt.tol = 1e-20;
    const auto r = sinkhorn_solve(p, opt);
    const double primal = primal_objective(r.coupling, p);
    const double dual = dual_objective(r.potentials, p);
    CHECK(std::abs(p.epsilon * dual + p.epsilon - primal) <= 1e-8);
    CHECK(dual <= primal / p.epsilon - 1.0 + 1e-9);
  }
}

TEST_CASE("converged coupling minimizes the primal over feasible 3x3 couplings") {
  CounterRng rng(21);
  const auto p = testing::random_problem(rng, 3, 3, 0.4);
  SinkhornOptions opt;
  opt.tol = 1e-14;
  const auto best = primal_objective(sinkhorn_solve(p, opt).coupling, p);
  for (int k = 0; k < 300; ++k) {
    // Random positive table, then marginal-corrected by IPFP.
    auto q = testing::random_coupling(rng, 3, 3, 0.01);
    for (int it = 0; it < 500; ++it) q = project_col(project_row(q, p.mu), p.nu);
    CHECK(primal_objective(q, p) >= best - 1e-10);
  }
}
